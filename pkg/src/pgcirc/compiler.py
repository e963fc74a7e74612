"""Compile binary PGCs into division-free, set-multilinear nonmonotone PCs.

Pipeline for a PGC ``f(z_1..z_n)``:

1. ratio substitution   g = f(x_1/xb_1, ..., x_n/xb_n) * xb_1 ... xb_n   (with Div nodes)
2. shift                xb_i -> 1 - xb_i, so every denominator has constant term 1
3. division elimination truncated power series, homogeneous components up to degree n
4. unshift              xb_i -> 1 - xb_i again (the shift is an involution)

The result has the coefficient of ``prod_{i in S} x_i prod_{i not in S} xb_i``
equal to the PGC coefficient of ``prod_{i in S} z_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .circuit import Circuit, CircuitBuilder
from .marginal import VariablePartition
from .pgc import Pgc, check_distribution


class BadShiftPoint(ArithmeticError):
    def __init__(self, index: int, message: str = "bad shift point"):
        self.index = index
        super().__init__(f"{message}: denominator at node {index} has zero constant term")


class CompileError(ValueError):
    pass


def positive_literal(i: int) -> str:
    return f"x{i}"


def negative_literal(i: int) -> str:
    return f"xb{i}"


def binary_partition(n: int) -> VariablePartition:
    """Parts ``(xb_i, x_i)``: slot 0 is the event X_i = 0, slot 1 is X_i = 1."""
    return VariablePartition(tuple((negative_literal(i), positive_literal(i)) for i in range(1, n + 1)))


def reflection(names: Sequence[str]) -> dict[str, tuple[Fraction, int]]:
    """Shift map u -> 1 - u on each name."""
    return {v: (Fraction(1), -1) for v in names}


# ------------------------------------------------------------------ stages


def ratio_substitute(pgc: Pgc) -> Circuit:
    if not pgc.is_binary:
        raise CompileError("ratio substitution needs a binary PGC")
    n = pgc.n
    names = [name for i in range(1, n + 1) for name in (positive_literal(i), negative_literal(i))]
    b = CircuitBuilder(names)
    subst = {}
    bars = []
    for i, z in enumerate(pgc.variables, start=1):
        x = b.var(positive_literal(i))
        xb = b.var(negative_literal(i))
        subst[z] = b.div(x, xb)
        bars.append(xb)
    root = b.graft(pgc.circuit, subst)
    return b.build(b.mul([root, *bars]), names)


def origin_values(circuit: Circuit) -> list[Fraction | None]:
    """Node values with every variable at 0; ``None`` where a division is undefined."""
    vals: list[Fraction | None] = []
    for node in circuit.nodes:
        k = node.kind
        if k == "const":
            vals.append(node.value)
        elif k == "var":
            vals.append(Fraction(0))
        else:
            ch = [vals[c] for c in node.children]
            if any(v is None for v in ch):
                vals.append(None)
            elif k == "sum":
                vals.append(sum((w * v for w, v in zip(node.weights, ch)), Fraction(0)))
            elif k == "prod":
                acc = Fraction(1)
                for v in ch:
                    acc *= v
                vals.append(acc)
            else:
                vals.append(None if ch[1] == 0 else ch[0] / ch[1])
    return vals


def _check_denominators(circuit: Circuit, vals: list[Fraction | None]) -> None:
    for i, node in enumerate(circuit.nodes):
        if node.kind == "div":
            den = vals[node.children[1]]
            if den is None or den == 0:
                raise BadShiftPoint(i)


def taylor_shift(circuit: Circuit, shift: Mapping[str, tuple[Fraction, int]]) -> Circuit:
    """Substitute ``u -> c + sign*u`` for every ``u: (c, sign)`` in ``shift``."""
    if not shift:
        return circuit
    b = CircuitBuilder()
    subst = {}
    for v, (c, sign) in shift.items():
        if sign not in (1, -1):
            raise ValueError("shift sign must be +1 or -1")
        subst[v] = b.add([b.const(1), b.var(v)], [Fraction(c), sign])
    out = b.build(b.graft(circuit, subst), circuit.variables)
    if not out.division_free:
        _check_denominators(out, origin_values(out))
    return out


class _Bundle:
    """Truncated power series of one gate: exact constant term plus node indices for degrees 1..D."""

    __slots__ = ("h0", "parts")

    def __init__(self, h0: Fraction, parts: list[int | None]):
        self.h0 = h0
        self.parts = parts


class _Eliminator:
    def __init__(self, D: int):
        self.D = D
        self.b = CircuitBuilder()

    def combine(self, terms: list[tuple[int, Fraction]]) -> int | None:
        terms = [(i, w) for i, w in terms if w != 0]
        if not terms:
            return None
        if len(terms) == 1 and terms[0][1] == 1:
            return terms[0][0]
        return self.b.add([i for i, _ in terms], [w for _, w in terms])

    def conv(self, f: _Bundle, g: _Bundle) -> _Bundle:
        parts: list[int | None] = [None] * (self.D + 1)
        for k in range(1, self.D + 1):
            terms: list[tuple[int, Fraction]] = []
            if g.parts[k] is not None:
                terms.append((g.parts[k], f.h0))
            if f.parts[k] is not None:
                terms.append((f.parts[k], g.h0))
            for i in range(1, k):
                fi, gj = f.parts[i], g.parts[k - i]
                if fi is not None and gj is not None:
                    terms.append((self.b.mul([fi, gj]), Fraction(1)))
            parts[k] = self.combine(terms)
        return _Bundle(f.h0 * g.h0, parts)

    def inverse(self, v: _Bundle) -> _Bundle:
        inv0 = 1 / v.h0
        parts: list[int | None] = [None] * (self.D + 1)
        for k in range(1, self.D + 1):
            terms: list[tuple[int, Fraction]] = []
            for i in range(1, k + 1):
                vi = v.parts[i]
                if vi is None:
                    continue
                if i == k:
                    terms.append((vi, -inv0 * inv0))
                elif parts[k - i] is not None:
                    terms.append((self.b.mul([vi, parts[k - i]]), -inv0))
            parts[k] = self.combine(terms)
        return _Bundle(inv0, parts)


def eliminate_divisions(circuit: Circuit, degree_bound: int) -> Circuit:
    """Division-free circuit for the degree <= D truncation of the power series of ``circuit``."""
    D = int(degree_bound)
    if D < 0:
        raise ValueError("degree bound must be nonnegative")
    h0 = origin_values(circuit)
    _check_denominators(circuit, h0)
    el = _Eliminator(D)
    b = el.b
    bundles: list[_Bundle] = []
    for node in circuit.nodes:
        k = node.kind
        if k == "const":
            bundles.append(_Bundle(node.value, [None] * (D + 1)))
        elif k == "var":
            parts: list[int | None] = [None] * (D + 1)
            if D >= 1:
                parts[1] = b.var(node.var)
            bundles.append(_Bundle(Fraction(0), parts))
        elif k == "sum":
            ch = [(bundles[c], w) for c, w in zip(node.children, node.weights)]
            parts = [None] * (D + 1)
            for deg in range(1, D + 1):
                parts[deg] = el.combine([(bb.parts[deg], w) for bb, w in ch if bb.parts[deg] is not None])
            bundles.append(_Bundle(sum((w * bb.h0 for bb, w in ch), Fraction(0)), parts))
        elif k == "prod":
            acc = _Bundle(Fraction(1), [None] * (D + 1))
            for c in node.children:
                acc = el.conv(acc, bundles[c])
            bundles.append(acc)
        else:
            u, v = bundles[node.children[0]], bundles[node.children[1]]
            bundles.append(el.conv(u, el.inverse(v)))
    root = bundles[circuit.output]
    terms = [(p, Fraction(1)) for p in root.parts[1:] if p is not None]
    if root.h0 != 0:
        terms.insert(0, (b.const(root.h0), Fraction(1)))
    out = b.add([i for i, _ in terms], [w for _, w in terms]) if terms else b.const(0)
    return b.build(out, circuit.variables)


# ------------------------------------------------------------------ pipeline


@dataclass(frozen=True)
class CompiledPc:
    circuit: Circuit
    partition: VariablePartition

    def __iter__(self):
        return iter((self.circuit, self.partition))


def compile_pgc_to_smlpc(pgc: Pgc, check: bool = False, monomial_budget: int = 200_000) -> CompiledPc:
    """Simulate a binary PGC by a division-free nonmonotone PC.

    With ``check=True`` the PGC is first expanded and refused if it is not a
    distribution; otherwise a non-multilinear input silently yields the
    degree <= n truncation.
    """
    if not pgc.is_binary:
        raise CompileError("only binary PGCs can be compiled")
    if check:
        res = check_distribution(pgc, monomial_budget)
        if not res.valid:
            raise CompileError(f"not a distribution: {res.witness}")
    n = pgc.n
    shift = reflection([negative_literal(i) for i in range(1, n + 1)])
    g = ratio_substitute(pgc)
    shifted = taylor_shift(g, shift)
    truncated = eliminate_divisions(shifted, n)
    return CompiledPc(taylor_shift(truncated, shift), binary_partition(n))
