"""Determinantal embeddings of formulas and algebraic branching programs.

Every construction produces a square matrix ``L`` with constant entries and an
affine projection of its diagonal: the represented polynomial is
``det(L + diag(a_1(x), ..., a_N(x)))``. Source variables therefore only ever
appear on the diagonal, which is what makes the result a projection of a DPP
(as a polynomial, a DPP is ``det(L + X)`` with ``X`` diagonal).

Formulas go through s,t-gadgets: weighted digraphs whose s,t-covers, closed
by the back edge ``(t, s)``, sum to the formula. ABPs get a subdivided-edge
graph in which every cycle cover has positive sign.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

import numpy as np

from .poly import SparsePolynomial

Label = Union[Fraction, str]

SYMBOLIC_COFACTOR_CAP = 12
DIAGONAL_EXPANSION_CAP = 16
CYCLE_COVER_CAP = 12


# ------------------------------------------------------------------ formulas


@dataclass(frozen=True)
class FConst:
    value: Fraction


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FAdd:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class FMul:
    left: Formula
    right: Formula


Formula = Union[FConst, FVar, FAdd, FMul]


def formula_eval(f: Formula, point: Mapping[str, object]) -> Fraction:
    if isinstance(f, FConst):
        return f.value
    if isinstance(f, FVar):
        return Fraction(point[f.name])
    a, b = formula_eval(f.left, point), formula_eval(f.right, point)
    return a + b if isinstance(f, FAdd) else a * b


def formula_poly(f: Formula) -> SparsePolynomial:
    if isinstance(f, FConst):
        return SparsePolynomial.const(f.value)
    if isinstance(f, FVar):
        return SparsePolynomial.var(f.name)
    a, b = formula_poly(f.left), formula_poly(f.right)
    return a + b if isinstance(f, FAdd) else a.mul(b)


def formula_counts(f: Formula) -> dict[str, int]:
    """Number of leaves, Add and Mul nodes."""
    counts = {"leaves": 0, "add": 0, "mul": 0}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (FConst, FVar)):
            counts["leaves"] += 1
        else:
            counts["add" if isinstance(g, FAdd) else "mul"] += 1
            stack += [g.left, g.right]
    return counts


def formula_variables(f: Formula) -> list[str]:
    out: dict[str, None] = {}
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, FVar):
            out[g.name] = None
        elif isinstance(g, (FAdd, FMul)):
            stack += [g.right, g.left]
    return list(out)


def format_formula(f: Formula) -> str:
    if isinstance(f, FConst):
        return str(f.value)
    if isinstance(f, FVar):
        return f.name
    op = "+" if isinstance(f, FAdd) else "*"
    return f"({format_formula(f.left)} {op} {format_formula(f.right)})"


_TOKEN = re.compile(r"\s*(?:(-?\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


class FormulaSyntaxError(ValueError):
    pass


def parse_formula(text: str) -> Formula:
    """Parse infix text with ``+``, ``*``, parentheses, ``p/q`` literals and identifiers.

    n-ary sums and products are curried to the left.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        pos = m.end()
        num, ident, sym = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif ident is not None:
            tokens.append(("id", ident))
        elif sym is not None and sym.strip():
            if sym not in "()+*":
                raise FormulaSyntaxError(f"unexpected character {sym!r}")
            tokens.append((sym, sym))
    tokens.append(("end", ""))
    i = 0

    def peek():
        return tokens[i][0]

    def take(kind):
        nonlocal i
        if tokens[i][0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, got {tokens[i][1]!r}")
        i += 1
        return tokens[i - 1][1]

    def expr():
        node = term()
        while peek() == "+":
            take("+")
            node = FAdd(node, term())
        return node

    def term():
        node = factor()
        while peek() == "*":
            take("*")
            node = FMul(node, factor())
        return node

    def factor():
        k = peek()
        if k == "num":
            return FConst(Fraction(take("num")))
        if k == "id":
            return FVar(take("id"))
        if k == "(":
            take("(")
            node = expr()
            take(")")
            return node
        raise FormulaSyntaxError(f"unexpected token {tokens[i][1]!r}")

    node = expr()
    take("end")
    return node


# ------------------------------------------------------------------ affine forms


@dataclass(frozen=True)
class AffineForm:
    const: Fraction = Fraction(0)
    coeffs: tuple[tuple[str, Fraction], ...] = ()

    @classmethod
    def of(cls, const=0, coeffs: Mapping[str, object] | None = None) -> AffineForm:
        items = tuple(sorted((v, Fraction(c)) for v, c in (coeffs or {}).items() if Fraction(c)))
        return cls(Fraction(const), items)

    @classmethod
    def variable(cls, name: str) -> AffineForm:
        return cls.of(0, {name: 1})

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def shifted(self, c) -> AffineForm:
        return AffineForm(self.const + Fraction(c), self.coeffs)

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        return self.const + sum((c * Fraction(point[v]) for v, c in self.coeffs), Fraction(0))

    def poly(self) -> SparsePolynomial:
        out = SparsePolynomial.const(self.const)
        for v, c in self.coeffs:
            out = out + SparsePolynomial.var(v).scale(c)
        return out

    def __str__(self) -> str:
        parts = [f"{c}*{v}" for v, c in self.coeffs]
        parts.append(str(self.const))
        return " + ".join(parts)


# ------------------------------------------------------------------ determinants


def exact_determinant(matrix: Sequence[Sequence]) -> Fraction:
    """Exact determinant over the rationals.

    Sparse matrices (gadget adjacency matrices) use elimination on dict rows
    with a fewest-entries pivot rule; dense ones use fraction-free (Bareiss)
    elimination after clearing row denominators.
    """
    n = len(matrix)
    if n == 0:
        return Fraction(1)
    if any(len(r) != n for r in matrix):
        raise ValueError("matrix is not square")
    nnz = sum(1 for r in matrix for x in r if x)
    if nnz * 4 <= n * n:
        return _sparse_determinant(matrix)
    return _bareiss_determinant(matrix)


def _sparse_determinant(matrix: Sequence[Sequence]) -> Fraction:
    n = len(matrix)
    rows = {i: {j: Fraction(x) for j, x in enumerate(r) if x} for i, r in enumerate(matrix)}
    det = Fraction(1)
    pivot_row = []
    for k in range(n):
        cands = [i for i, r in rows.items() if k in r]
        if not cands:
            return Fraction(0)
        p = min(cands, key=lambda i: (len(rows[i]), i))
        prow = rows.pop(p)
        pivot = prow[k]
        det *= pivot
        pivot_row.append(p)
        for i in cands:
            if i == p:
                continue
            r = rows[i]
            f = r[k] / pivot
            for c, v in prow.items():
                x = r.get(c, 0) - f * v
                if x:
                    r[c] = x
                else:
                    r.pop(c, None)
    # sign of the permutation column k -> pivot_row[k]
    seen = [False] * n
    sign = 1
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = pivot_row[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign * det


def _bareiss_determinant(matrix: Sequence[Sequence]) -> Fraction:
    n = len(matrix)
    rows = []
    scale = Fraction(1)
    for r in matrix:
        r = [Fraction(x) for x in r]
        lcm = 1
        for x in r:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
        rows.append([int(x * lcm) for x in r])
        scale /= lcm
    M = rows
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if M[i][k] != 0), None)
            if swap is None:
                return Fraction(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        pivot = M[k][k]
        for i in range(k + 1, n):
            Mi, Mk = M[i], M[k]
            a = Mi[k]
            for j in range(k + 1, n):
                Mi[j] = (pivot * Mi[j] - a * Mk[j]) // prev
            Mi[k] = 0
        prev = pivot
    return sign * M[n - 1][n - 1] * scale


def symbolic_determinant(matrix: Sequence[Sequence[SparsePolynomial]]) -> SparsePolynomial:
    """Laplace expansion along rows, memoized on the remaining column set (n <= 12)."""
    n = len(matrix)
    if n > SYMBOLIC_COFACTOR_CAP:
        raise ValueError(f"symbolic cofactor expansion is capped at {SYMBOLIC_COFACTOR_CAP} rows")
    memo: dict[int, SparsePolynomial] = {}

    def minor(row: int, cols: int) -> SparsePolynomial:
        if row == n:
            return SparsePolynomial.const(1)
        if cols in memo:
            return memo[cols]
        total = SparsePolynomial()
        sign = 1
        for j in range(n):
            if cols >> j & 1:
                entry = matrix[row][j]
                if entry:
                    sub = minor(row + 1, cols & ~(1 << j))
                    if sub:
                        term = entry.mul(sub)
                        total = total + (term if sign > 0 else -term)
                sign = -sign
        memo[cols] = total
        return total

    return minor(0, (1 << n) - 1)


def cycle_covers(matrix: Sequence[Sequence], cap: int = CYCLE_COVER_CAP):
    """Yield ``(permutation, sign)`` for every permutation using only nonzero entries.

    ``sign = (-1)^(n + #cycles)``; this is an independent oracle for the
    signed-cycle-cover reading of the determinant.
    """
    n = len(matrix)
    if n > cap:
        raise ValueError(f"cycle-cover enumeration is capped at {cap} nodes")
    nz = [[j for j in range(n) if _nonzero(matrix[i][j])] for i in range(n)]
    perm = [-1] * n
    used = [False] * n

    def rec(i):
        if i == n:
            yield tuple(perm), (-1) ** (n + _count_cycles(perm))
            return
        for j in nz[i]:
            if not used[j]:
                used[j] = True
                perm[i] = j
                yield from rec(i + 1)
                used[j] = False
        perm[i] = -1

    yield from rec(0)


def _nonzero(x) -> bool:
    return bool(x)


def _count_cycles(perm) -> int:
    seen = [False] * len(perm)
    cycles = 0
    for i in range(len(perm)):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = perm[j]
    return cycles


def cycle_cover_sum(matrix: Sequence[Sequence]):
    """Sum of signed cycle-cover weights (numeric or SparsePolynomial entries)."""
    total = None
    for perm, sign in cycle_covers(matrix):
        w = None
        for i, j in enumerate(perm):
            w = matrix[i][j] if w is None else w * matrix[i][j]
        w = w if sign > 0 else -w
        total = w if total is None else total + w
    return total if total is not None else Fraction(0)


# ------------------------------------------------------------------ DPP representation


@dataclass(frozen=True)
class DppRepresentation:
    """``det(kernel + diag(projection))`` with constant ``kernel`` and affine diagonal forms."""

    kernel: tuple[tuple[Fraction, ...], ...]
    projection: tuple[AffineForm, ...]

    def __post_init__(self):
        K = tuple(tuple(Fraction(x) for x in row) for row in self.kernel)
        if any(len(r) != len(K) for r in K):
            raise ValueError("kernel must be square")
        if len(self.projection) != len(K):
            raise ValueError("one diagonal form per row")
        object.__setattr__(self, "kernel", K)
        object.__setattr__(self, "projection", tuple(self.projection))

    @property
    def n(self) -> int:
        return len(self.kernel)

    def source_variables(self) -> list[str]:
        return sorted({v for a in self.projection for v, _ in a.coeffs})

    def matrix_at(self, point: Mapping[str, object]) -> list[list[Fraction]]:
        M = [list(r) for r in self.kernel]
        for i, a in enumerate(self.projection):
            M[i][i] += a.evaluate(point)
        return M

    def determinant_at(self, point: Mapping[str, object]) -> Fraction:
        return exact_determinant(self.matrix_at(point))

    def symbolic_matrix(self) -> list[list[SparsePolynomial]]:
        M = [[SparsePolynomial.const(x) for x in r] for r in self.kernel]
        for i, a in enumerate(self.projection):
            M[i][i] = M[i][i] + a.poly()
        return M

    def constant_matrix(self) -> list[list[Fraction]]:
        """The matrix with every source variable set to 0."""
        return self.matrix_at({v: 0 for v in self.source_variables()})

    def diagonal_confined(self) -> bool:
        M = self.symbolic_matrix()
        return all(
            M[i][j].degree() <= 0 for i in range(self.n) for j in range(self.n) if i != j
        ) and all(M[i][i].degree() <= 1 for i in range(self.n))

    def polynomial(self) -> SparsePolynomial:
        """Exact determinant polynomial.

        Expands over the diagonal positions whose form is non-constant:
        ``det(A + diag(y_V)) = sum_{S subset V} prod_{i in S} y_i * det(A minus rows/cols S)``.
        """
        A = self.constant_matrix()
        V = [i for i, a in enumerate(self.projection) if not a.is_constant]
        if len(V) > DIAGONAL_EXPANSION_CAP:
            raise ValueError(f"more than {DIAGONAL_EXPANSION_CAP} variable diagonal positions")
        linear = {i: AffineForm(Fraction(0), self.projection[i].coeffs).poly() for i in V}
        total = SparsePolynomial()
        for r in range(len(V) + 1):
            for S in itertools.combinations(V, r):
                keep = [i for i in range(self.n) if i not in S]
                minor = exact_determinant([[A[i][j] for j in keep] for i in keep])
                if minor == 0:
                    continue
                term = SparsePolynomial.const(minor)
                for i in S:
                    term = term.mul(linear[i])
                total = total + term
        return total


# ------------------------------------------------------------------ gadgets


@dataclass(frozen=True)
class StGadget:
    """Weighted digraph with distinguished source ``s`` and sink ``t`` (no back edge)."""

    n: int
    edges: tuple[tuple[tuple[int, int], Label], ...]
    s: int
    t: int

    @classmethod
    def from_edges(cls, n: int, edges: Mapping[tuple[int, int], Label], s: int, t: int) -> StGadget:
        clean = []
        for (u, v), w in sorted(edges.items()):
            if isinstance(w, str):
                if u != v:
                    raise ValueError("variables may only label self-loops")
            else:
                w = Fraction(w)
                if w == 0:
                    continue
            clean.append(((u, v), w))
        return cls(n, tuple(clean), s, t)

    @property
    def edge_map(self) -> dict[tuple[int, int], Label]:
        return dict(self.edges)

    def with_edge(self, u: int, v: int, label: Label) -> StGadget:
        e = self.edge_map
        e[(u, v)] = label
        return StGadget.from_edges(self.n, e, self.s, self.t)

    def to_dpp(self, closed: bool = True) -> DppRepresentation:
        K = [[Fraction(0)] * self.n for _ in range(self.n)]
        proj = [AffineForm() for _ in range(self.n)]
        for (u, v), w in self.edges:
            if isinstance(w, str):
                proj[u] = AffineForm.variable(w)
            else:
                K[u][v] += w
        if closed:
            K[self.t][self.s] += 1
        return DppRepresentation(tuple(map(tuple, K)), tuple(proj))

    def minor_dpp(self, removed: Sequence[int]) -> DppRepresentation:
        """Open graph (no back edge) with the given nodes deleted."""
        full = self.to_dpp(closed=False)
        keep = [i for i in range(self.n) if i not in set(removed)]
        K = tuple(tuple(full.kernel[i][j] for j in keep) for i in keep)
        return DppRepresentation(K, tuple(full.projection[i] for i in keep))


def _label(v) -> Label:
    return v if isinstance(v, str) else Fraction(v)


def base_gadget(v) -> StGadget:
    """Five nodes s, 2, 3, 4, t: path s -> 2 -> t, 3-cycle 2 -> 3 -> 4 -> 2, loops v on 3 and 1 on 4."""
    edges = {(0, 1): 1, (1, 2): 1, (1, 4): 1, (2, 2): _label(v), (2, 3): 1, (3, 1): 1, (3, 3): 1}
    return StGadget.from_edges(5, edges, 0, 4)


def _merge(edges: dict, key, w) -> None:
    if key in edges:
        old = edges[key]
        if isinstance(old, str) or isinstance(w, str):
            raise ValueError(f"parallel variable-labelled edges at {key}")
        edges[key] = old + w
    else:
        edges[key] = w


def add_gadgets(g1: StGadget, g2: StGadget) -> StGadget:
    """Identify s1 with s2 and t1 with t2: |g| = |g1| + |g2| - 2."""
    edges = dict(g1.edges)
    remap = {g2.s: g1.s, g2.t: g1.t}
    nxt = g1.n
    for i in range(g2.n):
        if i not in remap:
            remap[i] = nxt
            nxt += 1
    for (u, v), w in g2.edges:
        _merge(edges, (remap[u], remap[v]), w)
    return StGadget.from_edges(nxt, edges, g1.s, g1.t)


def mul_gadgets(g1: StGadget, g2: StGadget) -> StGadget:
    """Chain through a new node z with the 3-cycle t1 -> z -> s2 -> t1: |g| = |g1| + |g2| + 1."""
    z = g1.n
    off = g1.n + 1
    edges = dict(g1.edges)
    for (u, v), w in g2.edges:
        _merge(edges, (u + off, v + off), w)
    s2 = g2.s + off
    for key in ((g1.t, z), (z, s2), (s2, g1.t)):
        _merge(edges, key, Fraction(1))
    return StGadget.from_edges(g1.n + g2.n + 1, edges, g1.s, g2.t + off)


def formula_to_gadget(f: Formula) -> StGadget:
    if isinstance(f, FConst):
        return base_gadget(f.value)
    if isinstance(f, FVar):
        return base_gadget(f.name)
    a, b = formula_to_gadget(f.left), formula_to_gadget(f.right)
    return add_gadgets(a, b) if isinstance(f, FAdd) else mul_gadgets(a, b)


def formula_to_dpp(f: Formula) -> DppRepresentation:
    return formula_to_gadget(f).to_dpp(closed=True)


@dataclass(frozen=True)
class GadgetReport:
    st_minor: object
    s_minor: object
    t_minor: object
    closed_ok: bool | None
    offending: str | None

    @property
    def ok(self) -> bool:
        return self.offending is None

    @property
    def conditions(self) -> tuple:
        return (self.st_minor, self.s_minor, self.t_minor)


def verify_gadget(
    g: StGadget,
    expected: Formula | SparsePolynomial | None = None,
    points: int = 5,
    seed: int = 0,
    symbolic_limit: int = 8,
) -> GadgetReport:
    """Check det(G - {s,t}) = 1, det(G - s) = det(G - t) = 0 and the closed determinant.

    Minors are computed symbolically when the source variables sit on at most
    ``symbolic_limit`` diagonal positions, otherwise at random points.
    """
    rng = np.random.default_rng(seed)
    minors = []
    targets = (1, 0, 0)
    names = ("det(G - {s,t})", "det(G - s)", "det(G - t)")
    offending = None
    for removed, target, name in zip(([g.s, g.t], [g.s], [g.t]), targets, names):
        rep = g.minor_dpp(removed)
        if sum(not a.is_constant for a in rep.projection) <= min(symbolic_limit, DIAGONAL_EXPANSION_CAP):
            val = rep.polynomial()
            good = val == SparsePolynomial.const(target)
        else:
            pts = [_random_point(rep.source_variables(), rng) for _ in range(points)]
            vals = [rep.determinant_at(p) for p in pts]
            val = vals[0]
            good = all(v == target for v in vals)
        minors.append(val)
        if not good and offending is None:
            offending = f"{name} = {val}, expected {target}"
    closed_ok = None
    if expected is not None:
        rep = g.to_dpp(closed=True)
        variables = sorted(set(rep.source_variables()) | set(_expected_vars(expected)))
        closed_ok = True
        for _ in range(points):
            p = _random_point(variables, rng)
            want = formula_eval(expected, p) if not isinstance(expected, SparsePolynomial) else expected.evaluate(p)
            got = rep.determinant_at(p)
            if got != want:
                closed_ok = False
                if offending is None:
                    offending = f"closed determinant {got} != {want} at {p}"
                break
    return GadgetReport(minors[0], minors[1], minors[2], closed_ok, offending)


def _expected_vars(expected) -> list[str]:
    if isinstance(expected, SparsePolynomial):
        return sorted(expected.variables())
    return formula_variables(expected)


def _random_point(names, rng) -> dict[str, Fraction]:
    return {v: Fraction(int(rng.integers(-50, 51)), int(rng.integers(1, 8))) for v in names}


def psd_shift(rep: DppRepresentation, m) -> DppRepresentation:
    """Add ``m`` to every kernel diagonal entry and subtract it again in the projection.

    The projected determinant is unchanged; the constant kernel must come out
    strictly diagonally dominant with positive diagonal.
    """
    m = Fraction(m)
    K = [list(r) for r in rep.kernel]
    need = Fraction(0)
    for i, row in enumerate(K):
        off = sum((abs(x) for j, x in enumerate(row) if j != i), Fraction(0))
        need = max(need, off - row[i])
    if m <= need:
        raise ValueError(f"shift too small: m must exceed {need}")
    for i in range(len(K)):
        K[i][i] += m
    proj = tuple(a.shifted(-m) for a in rep.projection)
    return DppRepresentation(tuple(map(tuple, K)), proj)


def strictly_diagonally_dominant(M: Sequence[Sequence[Fraction]]) -> bool:
    return all(
        M[i][i] > 0 and M[i][i] > sum(abs(x) for j, x in enumerate(M[i]) if j != i) for i in range(len(M))
    )


# ------------------------------------------------------------------ ABPs


@dataclass(frozen=True)
class Abp:
    """Layered s-t digraph; the polynomial is the sum over s-t paths of edge-label products.

    Edges join consecutive layers. Parallel edges are allowed.
    """

    layers: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[str, str, Label], ...]
    source: str = "s"
    sink: str = "t"

    def __post_init__(self):
        layer_of = {}
        for k, layer in enumerate(self.layers):
            for v in layer:
                if v in layer_of:
                    raise ValueError(f"node {v!r} in two layers")
                layer_of[v] = k
        if self.source not in layer_of or self.sink not in layer_of:
            raise ValueError("source and sink must be ABP nodes")
        clean = []
        for u, v, w in self.edges:
            if u not in layer_of or v not in layer_of:
                raise ValueError(f"edge ({u}, {v}) uses an unknown node")
            if layer_of[v] != layer_of[u] + 1:
                raise ValueError(f"edge ({u}, {v}) does not join consecutive layers")
            if v == self.source or u == self.sink:
                raise ValueError("source must have indegree 0 and sink outdegree 0")
            clean.append((u, v, w if isinstance(w, str) else Fraction(w)))
        object.__setattr__(self, "edges", tuple(clean))
        object.__setattr__(self, "layers", tuple(tuple(l) for l in self.layers))

    @property
    def nodes(self) -> list[str]:
        return [v for layer in self.layers for v in layer]

    def layer_of(self, node: str) -> int:
        for k, layer in enumerate(self.layers):
            if node in layer:
                return k
        raise KeyError(node)

    def polynomial(self) -> SparsePolynomial:
        """Path-sum by dynamic programming in layer order."""
        acc = {v: SparsePolynomial() for v in self.nodes}
        acc[self.source] = SparsePolynomial.const(1)
        for layer in self.layers:
            for u in layer:
                for a, b, w in self.edges:
                    if a == u:
                        lab = SparsePolynomial.var(w) if isinstance(w, str) else SparsePolynomial.const(w)
                        acc[b] = acc[b] + acc[u].mul(lab)
        return acc[self.sink]

    def evaluate(self, point: Mapping[str, object]) -> Fraction:
        acc = {v: Fraction(0) for v in self.nodes}
        acc[self.source] = Fraction(1)
        for layer in self.layers:
            for u in layer:
                for a, b, w in self.edges:
                    if a == u:
                        acc[b] += acc[u] * (Fraction(point[w]) if isinstance(w, str) else w)
        return acc[self.sink]


def imm_variable(k: int, i: int, j: int) -> str:
    return f"x{k}_{i}_{j}"


def imm_abp(n: int, d: int) -> Abp:
    """ABP for the (1,1) entry of the product of d symbolic n x n matrices."""
    if d < 1:
        raise ValueError("need at least one matrix")
    layers = [("s",)]
    for layer in range(1, d):
        layers.append(tuple(f"a{layer}_{k}" for k in range(1, n + 1)))
    layers.append(("t",))
    edges = []
    if d == 1:
        edges.append(("s", "t", imm_variable(1, 1, 1)))
    else:
        for k in range(1, n + 1):
            edges.append(("s", f"a1_{k}", imm_variable(1, 1, k)))
        for layer in range(1, d - 1):
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    edges.append((f"a{layer}_{i}", f"a{layer + 1}_{j}", imm_variable(layer + 1, i, j)))
        for k in range(1, n + 1):
            edges.append((f"a{d - 1}_{k}", "t", imm_variable(d, k, 1)))
    return Abp(tuple(layers), tuple(edges))


def imm_matrix_product(n: int, d: int) -> SparsePolynomial:
    """(1,1) entry of X^(1) ... X^(d), by symbolic matrix multiplication."""
    def sym(k):
        return [[SparsePolynomial.var(imm_variable(k, i, j)) for j in range(1, n + 1)] for i in range(1, n + 1)]

    M = sym(1)
    for k in range(2, d + 1):
        B = sym(k)
        M = [[sum((M[i][l].mul(B[l][j]) for l in range(n)), SparsePolynomial()) for j in range(n)] for i in range(n)]
    return M[0][0]


def abp_to_dpp(abp: Abp) -> DppRepresentation:
    """Subdivide every edge through a node carrying a weighted 3-cycle; pad internal nodes with unit 3-cycles."""
    index: dict[str, int] = {v: i for i, v in enumerate(abp.nodes)}
    n = len(index)
    K: dict[tuple[int, int], Fraction] = {}
    diag: dict[int, Label] = {}

    def edge(u, v):
        K[(u, v)] = K.get((u, v), Fraction(0)) + 1

    def triangle(center, loop_first: Label):
        nonlocal n
        a, b = n, n + 1
        n += 2
        edge(center, a)
        edge(a, b)
        edge(b, center)
        diag[a] = loop_first
        diag[b] = Fraction(1)

    for u, v, w in abp.edges:
        ne = n
        n += 1
        edge(index[u], ne)
        edge(ne, index[v])
        triangle(ne, w)
    for v in abp.nodes:
        if v not in (abp.source, abp.sink):
            triangle(index[v], Fraction(1))
    edge(index[abp.sink], index[abp.source])
    kernel = [[Fraction(0)] * n for _ in range(n)]
    for (u, v), w in K.items():
        kernel[u][v] += w
    proj = [AffineForm() for _ in range(n)]
    for i, w in diag.items():
        if isinstance(w, str):
            proj[i] = AffineForm.variable(w)
        else:
            kernel[i][i] += w
    return DppRepresentation(tuple(map(tuple, kernel)), tuple(proj))
