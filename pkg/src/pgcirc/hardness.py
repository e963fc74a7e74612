"""Graph-to-PGC reductions from matching counting, with brute-force oracles.

Two constructions:

* quaternary: for a 3-regular bipartite ``G`` with sides ``U, V`` of size n,
  ``f = prod_i sum_{j in N(i)} E_{i,j} V_j`` normalised by ``3^n``. The
  probability that every ``V_j`` equals 1 is ``#PM(G) / 3^n``.
* ternary: for a (2,3)-regular ``G`` (left degree 2, right degree 3),
  ``f = prod_j (lam + sum_{i in N(j)} U_i)`` normalised by ``(lam + 3)^n``. The
  probability that every ``U_i`` lies in {0, 1} is ``RMatch(G, lam) / (lam + 3)^n``.

Vertices are 0-based internally and 1-based in variable names and files.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod
from typing import Sequence

import numpy as np

from . import kernels
from .circuit import CircuitBuilder, expand
from .field import stream
from .pgc import Pgc, check_distribution, selective_marginal_oracle
from .poly import BudgetExceeded, SparsePolynomial

PERMANENT_CAP = 12
ENUMERATION_CAP = 8
SUBSET_ORACLE_CAP = 16
RETRY_LIMIT = 1000

THREE_REGULAR = "3-regular"
TWO_THREE = "(2,3)-regular"
IRREGULAR = "irregular"


class RegularityError(ValueError):
    pass


@dataclass(frozen=True)
class RegularityProfile:
    kind: str
    left_degrees: tuple[int, ...]
    right_degrees: tuple[int, ...]


@dataclass(frozen=True)
class BipartiteGraph:
    """Left side U (rows of the biadjacency matrix), right side V (columns)."""

    left: int
    right: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.left < 0 or self.right < 0:
            raise ValueError("side sizes must be nonnegative")
        edges = tuple(sorted((int(u), int(v)) for u, v in self.edges))
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edge")
        for u, v in edges:
            if not (0 <= u < self.left and 0 <= v < self.right):
                raise ValueError(f"edge ({u + 1}, {v + 1}) out of range")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_biadjacency(cls, A) -> BipartiteGraph:
        A = np.asarray(A)
        return cls(A.shape[0], A.shape[1], tuple((int(u), int(v)) for u, v in zip(*np.nonzero(A))))

    @classmethod
    def complete(cls, m: int, n: int) -> BipartiteGraph:
        return cls(m, n, tuple(itertools.product(range(m), range(n))))

    def biadjacency(self) -> np.ndarray:
        A = np.zeros((self.left, self.right), dtype=np.int64)
        for u, v in self.edges:
            A[u, v] = 1
        return A

    def neighbours(self, i: int) -> tuple[int, ...]:
        """Right neighbours of left vertex ``i``, ascending."""
        return tuple(v for u, v in self.edges if u == i)

    def left_neighbours(self, j: int) -> tuple[int, ...]:
        return tuple(u for u, v in self.edges if v == j)

    def neighbour(self, i: int, k: int) -> int:
        """The k-th (0-based) right neighbour of left vertex ``i``."""
        return self.neighbours(i)[k]

    def profile(self) -> RegularityProfile:
        ld = tuple(len(self.neighbours(i)) for i in range(self.left))
        rd = tuple(len(self.left_neighbours(j)) for j in range(self.right))
        if self.left == self.right and self.left > 0 and set(ld) == {3} and set(rd) == {3}:
            kind = THREE_REGULAR
        elif (
            self.right > 0
            and self.right % 2 == 0
            and 2 * self.left == 3 * self.right
            and set(ld) == {2}
            and set(rd) == {3}
        ):
            kind = TWO_THREE
        else:
            kind = IRREGULAR
        return RegularityProfile(kind, ld, rd)


def small_cubic_graph() -> BipartiteGraph:
    """A 3-regular bipartite graph on 4 + 4 vertices with 9 perfect matchings."""
    adj = {0: (0, 1, 2), 1: (0, 1, 3), 2: (0, 2, 3), 3: (1, 2, 3)}
    return BipartiteGraph(4, 4, tuple((u, v) for u, vs in adj.items() for v in vs))


# ------------------------------------------------------------------ reductions


def v_name(j: int) -> str:
    return f"V{j + 1}"


def e_name(i: int, j: int) -> str:
    return f"E{i + 1}_{j + 1}"


def u_name(i: int) -> str:
    return f"U{i + 1}"


def _scaled(b: CircuitBuilder, root: int, factor: Fraction) -> int:
    return b.add([root], [factor])


def quaternary_pgc_from_graph(G: BipartiteGraph, require_regular: bool = True) -> tuple[Pgc, Fraction]:
    """Normalised ``prod_i sum_{j in N(i)} E_{i,j} V_j`` and its normaliser ``f(1, ..., 1)``.

    Without the regularity requirement the normaliser is the product of left
    degrees and each ``V_j`` gets arity ``deg(j) + 1``.
    """
    prof = G.profile()
    if require_regular and prof.kind != THREE_REGULAR:
        raise RegularityError("graph is not 3-regular bipartite")
    if G.left != G.right:
        raise RegularityError("both sides must have the same size")
    norm = Fraction(prod(prof.left_degrees))
    if norm == 0:
        raise RegularityError("a left vertex has no neighbours")
    names = [v_name(j) for j in range(G.right)] + [e_name(u, v) for u, v in G.edges]
    arity = [max(d + 1, 2) for d in prof.right_degrees] + [2] * len(G.edges)
    b = CircuitBuilder(names)
    factors = []
    for i in range(G.left):
        terms = [b.mul([b.var(e_name(i, j)), b.var(v_name(j))]) for j in G.neighbours(i)]
        factors.append(b.add(terms, [1] * len(terms)))
    root = _scaled(b, b.mul(factors), 1 / norm)
    return Pgc(b.build(root, names), names, arity), norm


def ternary_pgc_from_graph(G: BipartiteGraph, lam, require_regular: bool = True) -> tuple[Pgc, Fraction]:
    """Normalised ``prod_j (lam + sum_{i in N(j)} U_i)`` and its normaliser."""
    lam = Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    prof = G.profile()
    if require_regular and prof.kind != TWO_THREE:
        raise RegularityError("graph is not (2,3)-regular bipartite")
    norm = prod((lam + d for d in prof.right_degrees), start=Fraction(1))
    names = [u_name(i) for i in range(G.left)]
    arity = [max(d + 1, 2) for d in prof.left_degrees]
    b = CircuitBuilder(names)
    factors = []
    for j in range(G.right):
        kids = [b.const(1)] + [b.var(u_name(i)) for i in G.left_neighbours(j)]
        factors.append(b.add(kids, [lam] + [1] * (len(kids) - 1)))
    root = _scaled(b, b.mul(factors), 1 / norm)
    return Pgc(b.build(root, names), names, arity), norm


# ------------------------------------------------------------------ oracles


def count_perfect_matchings_enum(G: BipartiteGraph) -> int:
    """Backtracking over permutations of V restricted to edges."""
    if G.left != G.right:
        return 0
    nbrs = [G.neighbours(i) for i in range(G.left)]
    used = [False] * G.right

    def rec(i: int) -> int:
        if i == G.left:
            return 1
        total = 0
        for j in nbrs[i]:
            if not used[j]:
                used[j] = True
                total += rec(i + 1)
                used[j] = False
        return total

    return rec(0)


def count_perfect_matchings(G: BipartiteGraph) -> int:
    """Permanent of the biadjacency matrix (Ryser), cross-checked by enumeration for n <= 8."""
    if G.left != G.right:
        return 0
    if G.left > PERMANENT_CAP:
        raise BudgetExceeded(f"permanent oracle is capped at n = {PERMANENT_CAP}")
    if G.left == 0:
        return 1
    value = int(kernels.permanent_ryser(G.biadjacency()))
    if G.left <= ENUMERATION_CAP:
        check = count_perfect_matchings_enum(G)
        if check != value:
            raise RuntimeError(f"permanent counters disagree: Ryser {value}, enumeration {check}")
    return value


def matching_size_counts(G: BipartiteGraph) -> list[int]:
    """``counts[k]`` = number of matchings with k edges (include/exclude branching)."""
    counts = [0] * (min(G.left, G.right) + 1)
    edges = G.edges
    used_l = [False] * G.left
    used_r = [False] * G.right

    def rec(e: int, size: int):
        if e == len(edges):
            counts[size] += 1
            return
        u, v = edges[e]
        rec(e + 1, size)
        if not used_l[u] and not used_r[v]:
            used_l[u] = used_r[v] = True
            rec(e + 1, size + 1)
            used_l[u] = used_r[v] = False

    rec(0, 0)
    return counts


def _poly_from_counts(counts: Sequence[int], right: int, var: str) -> SparsePolynomial:
    out = SparsePolynomial()
    for k, c in enumerate(counts):
        if c:
            e = right - k
            term = SparsePolynomial.const(c)
            for _ in range(e):
                term = term.mul(SparsePolynomial.var(var))
            out = out + term
    return out


def rmatch_poly(G: BipartiteGraph, var: str = "x") -> SparsePolynomial:
    """``sum_M x^(#unmatched right vertices)`` over all matchings M."""
    return _poly_from_counts(matching_size_counts(G), G.right, var)


def rmatch_poly_subsets(G: BipartiteGraph, var: str = "x") -> SparsePolynomial:
    """Same polynomial by filtering all edge subsets; only for |E| <= 16."""
    if len(G.edges) > SUBSET_ORACLE_CAP:
        raise BudgetExceeded(f"subset oracle is capped at {SUBSET_ORACLE_CAP} edges")
    counts = [0] * (min(G.left, G.right) + 1)
    for mask in range(1 << len(G.edges)):
        chosen = [G.edges[k] for k in range(len(G.edges)) if mask >> k & 1]
        if len({u for u, _ in chosen}) == len(chosen) and len({v for _, v in chosen}) == len(chosen):
            counts[len(chosen)] += 1
    return _poly_from_counts(counts, G.right, var)


def rmatch(G: BipartiteGraph, lam) -> Fraction:
    lam = Fraction(lam)
    return sum((c * lam ** (G.right - k) for k, c in enumerate(matching_size_counts(G))), Fraction(0))


# ------------------------------------------------------------------ identity checks


@dataclass(frozen=True)
class IdentityReport:
    marginal: Fraction
    expected: Fraction
    count: Fraction
    normalization: Fraction
    h_monomials: int | None = None

    @property
    def holds(self) -> bool:
        return self.marginal == self.expected


def verify_quaternary_identity(
    G: BipartiteGraph, require_regular: bool = True, monomial_budget: int = 200_000
) -> IdentityReport:
    """Pr[V_1 = ... = V_n = 1] from the expanded table against #PM(G) / normaliser."""
    pgc, norm = quaternary_pgc_from_graph(G, require_regular)
    check = check_distribution(pgc, monomial_budget)
    if not check.valid:
        raise ValueError(f"reduction did not produce a distribution: {check.witness}")
    sets = [[1]] * G.right + [[0, 1]] * len(G.edges)
    marginal = selective_marginal_oracle(check.table, sets)
    pm = count_perfect_matchings(G)
    poly = expand(pgc.circuit, monomial_budget)
    vs = {v_name(j) for j in range(G.right)}
    h = sum(1 for m, _ in poly.items() if {v for v, e in m if v in vs and e == 1} == vs)
    return IdentityReport(marginal, Fraction(pm) / norm, Fraction(pm), norm, h)


def verify_ternary_identity(
    G: BipartiteGraph, lam, require_regular: bool = True, monomial_budget: int = 200_000
) -> IdentityReport:
    """Selective marginal with every U_i in {0, 1} against RMatch(G, lam) / normaliser."""
    pgc, norm = ternary_pgc_from_graph(G, lam, require_regular)
    check = check_distribution(pgc, monomial_budget)
    if not check.valid:
        raise ValueError(f"reduction did not produce a distribution: {check.witness}")
    marginal = selective_marginal_oracle(check.table, [[0, 1]] * G.left)
    r = rmatch(G, lam)
    return IdentityReport(marginal, r / norm, r, norm)


# ------------------------------------------------------------------ generators


def random_regular_bipartite(kind: str, n: int, seed: int = 0) -> BipartiteGraph:
    """Configuration model with rejection of parallel edges.

    ``kind`` is ``"3-regular"`` (n + n vertices) or ``"(2,3)-regular"``
    (3n/2 left vertices of degree 2, n right vertices of degree 3).
    """
    if kind in (THREE_REGULAR, "3", "quaternary"):
        if n < 3:
            raise ValueError("a 3-regular bipartite graph needs n >= 3")
        left, ldeg = n, 3
    elif kind in (TWO_THREE, "(2,3)", "2,3", "ternary"):
        if n < 2 or n % 2:
            raise ValueError("n has to be even and positive for (2,3)-regular graphs")
        left, ldeg = 3 * n // 2, 2
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    left_stubs = np.repeat(np.arange(left), ldeg)
    right_stubs = np.repeat(np.arange(n), 3)
    for attempt in range(RETRY_LIMIT):
        rng = stream(seed, 17, attempt)
        perm = rng.permutation(right_stubs)
        edges = list(zip(left_stubs.tolist(), perm.tolist()))
        if len(set(edges)) == len(edges):
            return BipartiteGraph(left, n, tuple(edges))
    raise RuntimeError(f"no simple graph after {RETRY_LIMIT} attempts")
