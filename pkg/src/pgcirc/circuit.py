"""Exact-arithmetic circuit IR.

A :class:`Circuit` is an immutable DAG stored as a topologically ordered node
list: every child index is strictly smaller than its parent's index, so the
order itself witnesses acyclicity. Sum nodes carry rational edge weights,
product nodes do not. Division nodes exist only as an intermediate form for the
PGC compiler; every distribution-bearing artifact is division-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import kernels
from .field import P, FieldError, stream, to_fp, uniform_points
from .poly import BudgetExceeded, SparsePolynomial

KINDS = ("const", "var", "sum", "prod", "div")
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}


class CircuitError(ValueError):
    """Structural violation found by :func:`validate`."""

    def __init__(self, index: int | None, kind: str, detail: str = ""):
        self.index = index
        self.kind = kind
        where = "circuit" if index is None else f"node {index}"
        super().__init__(f"{where}: {kind}" + (f" ({detail})" if detail else ""))


class EvaluationError(ArithmeticError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(message)


@dataclass(frozen=True)
class Node:
    kind: str
    value: Fraction | None = None
    var: str | None = None
    children: tuple[int, ...] = ()
    weights: tuple[Fraction, ...] = ()

    @property
    def n_edges(self) -> int:
        return len(self.children)


def Const(value) -> Node:
    return Node("const", value=Fraction(value))


def Var(name: str) -> Node:
    return Node("var", var=name)


def Sum(children: Sequence[int], weights: Sequence | None = None) -> Node:
    children = tuple(children)
    if weights is None:
        weights = (1,) * len(children)
    return Node("sum", children=children, weights=tuple(Fraction(w) for w in weights))


def Prod(children: Sequence[int]) -> Node:
    return Node("prod", children=tuple(children))


def Div(num: int, den: int) -> Node:
    return Node("div", children=(num, den))


class FpProgram(NamedTuple):
    kind: np.ndarray
    arg: np.ndarray
    cptr: np.ndarray
    cidx: np.ndarray
    cw: np.ndarray
    cval: np.ndarray
    out: int

    def args(self):
        return self.kind, self.arg, self.cptr, self.cidx, self.cw, self.cval


@dataclass(frozen=True, eq=True)
class Circuit:
    nodes: tuple[Node, ...]
    output: int
    variables: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if not self.variables:
            seen = dict.fromkeys(n.var for n in self.nodes if n.kind == "var")
            object.__setattr__(self, "variables", tuple(seen))
        else:
            object.__setattr__(self, "variables", tuple(self.variables))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return sum(n.n_edges for n in self.nodes)

    @property
    def size(self) -> int:
        """Node count plus edge count."""
        return len(self.nodes) + self.n_edges

    @property
    def division_free(self) -> bool:
        return all(n.kind != "div" for n in self.nodes)

    @cached_property
    def used_variables(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(n.var for n in self.nodes if n.kind == "var"))

    @cached_property
    def fp_program(self) -> FpProgram:
        """Flat arrays for :mod:`pgcirc.kernels`; variable columns follow ``variables``."""
        col = {v: i for i, v in enumerate(self.variables)}
        n = len(self.nodes)
        kind = np.empty(n, dtype=np.int8)
        arg = np.full(n, -1, dtype=np.int64)
        cptr = np.zeros(n + 1, dtype=np.int64)
        cval = np.zeros(n, dtype=np.uint64)
        cidx: list[int] = []
        cw: list[int] = []
        for i, node in enumerate(self.nodes):
            kind[i] = _KIND_CODE[node.kind]
            if node.kind == "const":
                cval[i] = to_fp(node.value)
            elif node.kind == "var":
                arg[i] = col[node.var]
            cidx.extend(node.children)
            if node.kind == "sum":
                cw.extend(to_fp(w) for w in node.weights)
            else:
                cw.extend([1] * len(node.children))
            cptr[i + 1] = len(cidx)
        return FpProgram(
            kind,
            arg,
            cptr,
            np.asarray(cidx, dtype=np.int64),
            np.asarray(cw, dtype=np.uint64),
            cval,
            self.output,
        )

    def fp_eval_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate at the columns of ``X`` (rows follow ``variables``) over GF(p)."""
        prog = self.fp_program
        X = np.ascontiguousarray(X, dtype=np.uint64)
        return kernels.fp_eval_batch(*prog.args(), X, prog.out)


# --------------------------------------------------------------------- builder


class CircuitBuilder:
    """Incremental construction; variable and constant leaves are shared."""

    def __init__(self, variables: Iterable[str] = ()):
        self.nodes: list[Node] = []
        self._vars: dict[str, int] = {}
        self._consts: dict[Fraction, int] = {}
        self._declared: dict[str, None] = dict.fromkeys(variables)

    def __len__(self) -> int:
        return len(self.nodes)

    def _push(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def declare(self, *names: str) -> None:
        for n in names:
            self._declared.setdefault(n, None)

    def const(self, value) -> int:
        value = Fraction(value)
        idx = self._consts.get(value)
        if idx is None:
            idx = self._consts[value] = self._push(Const(value))
        return idx

    def var(self, name: str) -> int:
        idx = self._vars.get(name)
        if idx is None:
            self._declared.setdefault(name, None)
            idx = self._vars[name] = self._push(Var(name))
        return idx

    def add(self, children: Sequence[int], weights: Sequence | None = None) -> int:
        return self._push(Sum(children, weights))

    def mul(self, children: Sequence[int]) -> int:
        return self._push(Prod(children))

    def div(self, num: int, den: int) -> int:
        return self._push(Div(num, den))

    def scale(self, child: int, weight) -> int:
        return self.add([child], [weight])

    def graft(self, circuit: Circuit, substitution: Mapping[str, int] | None = None) -> int:
        """Copy ``circuit`` into this builder, replacing variables per ``substitution``.

        Returns the index of the copied output node.
        """
        return self.graft_all(circuit, substitution)[circuit.output]

    def graft_all(self, circuit: Circuit, substitution: Mapping[str, int] | None = None) -> list[int]:
        substitution = substitution or {}
        for v in circuit.variables:
            if v not in substitution:
                self._declared.setdefault(v, None)
        remap: list[int] = []
        for node in circuit.nodes:
            k = node.kind
            if k == "const":
                remap.append(self.const(node.value))
            elif k == "var":
                if node.var in substitution:
                    remap.append(substitution[node.var])
                else:
                    remap.append(self.var(node.var))
            elif k == "sum":
                remap.append(self.add([remap[c] for c in node.children], node.weights))
            elif k == "prod":
                remap.append(self.mul([remap[c] for c in node.children]))
            else:
                remap.append(self.div(remap[node.children[0]], remap[node.children[1]]))
        return remap

    def build(self, output: int, variables: Iterable[str] | None = None) -> Circuit:
        if variables is None:
            variables = tuple(self._declared)
        return Circuit(tuple(self.nodes), output, tuple(variables))


def const_circuit(value) -> Circuit:
    return Circuit((Const(value),), 0, ())


def var_circuit(name: str) -> Circuit:
    return Circuit((Var(name),), 0, (name,))


# ------------------------------------------------------------------ validation


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    division_free: bool
    n_nodes: int
    n_edges: int
    size: int


def validate(circuit: Circuit, require_division_free: bool = False) -> ValidationReport:
    """Check the structural invariants; raise :class:`CircuitError` on the first violation."""
    nodes = circuit.nodes
    if not nodes:
        raise CircuitError(None, "empty circuit")
    if not 0 <= circuit.output < len(nodes):
        raise CircuitError(None, "invalid output", f"index {circuit.output}")
    if len(set(circuit.variables)) != len(circuit.variables):
        raise CircuitError(None, "duplicate variable")
    declared = set(circuit.variables)
    for i, node in enumerate(nodes):
        if node.kind not in _KIND_CODE:
            raise CircuitError(i, "unknown node kind", repr(node.kind))
        for c in node.children:
            if not isinstance(c, (int, np.integer)) or c < 0:
                raise CircuitError(i, "bad child index", repr(c))
            if c >= i:
                raise CircuitError(i, "forward reference", f"child {c}")
        if node.kind == "const":
            if not isinstance(node.value, Fraction):
                raise CircuitError(i, "weight not normalized", repr(node.value))
            if node.children:
                raise CircuitError(i, "leaf with children")
        elif node.kind == "var":
            if node.var not in declared:
                raise CircuitError(i, "undeclared variable", node.var)
            if node.children:
                raise CircuitError(i, "leaf with children")
        elif node.kind == "sum":
            if len(node.weights) != len(node.children):
                raise CircuitError(i, "weight count mismatch")
            for w in node.weights:
                if not isinstance(w, Fraction):
                    raise CircuitError(i, "weight not normalized", repr(w))
        elif node.kind == "div":
            if len(node.children) != 2:
                raise CircuitError(i, "division arity", str(len(node.children)))
            if require_division_free:
                raise CircuitError(i, "division node in division-free circuit")
    return ValidationReport(True, circuit.division_free, len(nodes), circuit.n_edges, circuit.size)


# ------------------------------------------------------------------ evaluation


def node_values(circuit: Circuit, point: Mapping[str, object], field: int | None = None) -> list:
    """Values of all nodes; ``field=None`` is exact rational, an int ``p`` is GF(p)."""
    vals: list = []
    if field is None:
        for i, node in enumerate(circuit.nodes):
            k = node.kind
            if k == "const":
                vals.append(node.value)
            elif k == "var":
                try:
                    vals.append(Fraction(point[node.var]))
                except KeyError:
                    raise EvaluationError(f"unmapped variable {node.var!r}", i) from None
            elif k == "sum":
                acc = Fraction(0)
                for c, w in zip(node.children, node.weights):
                    v = vals[c]
                    if v:  # indicator points make most values zero
                        acc += v if w == 1 else w * v
                vals.append(acc)
            elif k == "prod":
                acc = Fraction(1)
                for c in node.children:
                    v = vals[c]
                    if not v:
                        acc = Fraction(0)
                        break
                    if v != 1:
                        acc *= v
                vals.append(acc)
            else:
                den = vals[node.children[1]]
                if den == 0:
                    raise EvaluationError(f"division by zero at node {i}", i)
                vals.append(vals[node.children[0]] / den)
        return vals

    p = int(field)
    for i, node in enumerate(circuit.nodes):
        k = node.kind
        if k == "const":
            vals.append(_rat_mod(node.value, p, i))
        elif k == "var":
            try:
                x = point[node.var]
            except KeyError:
                raise EvaluationError(f"unmapped variable {node.var!r}", i) from None
            vals.append(_rat_mod(Fraction(x), p, i) if isinstance(x, Fraction) else int(x) % p)
        elif k == "sum":
            vals.append(sum(_rat_mod(w, p, i) * vals[c] for c, w in zip(node.children, node.weights)) % p)
        elif k == "prod":
            acc = 1
            for c in node.children:
                acc = acc * vals[c] % p
            vals.append(acc)
        else:
            den = vals[node.children[1]]
            if den == 0:
                raise EvaluationError(f"division by zero at node {i}", i)
            vals.append(vals[node.children[0]] * pow(den, -1, p) % p)
    return vals


def _rat_mod(x: Fraction, p: int, index: int) -> int:
    if x.denominator % p == 0:
        raise EvaluationError(f"denominator of {x} divisible by p", index)
    return x.numerator * pow(x.denominator, -1, p) % p


def evaluate(circuit: Circuit, point: Mapping[str, object], field: int | None = None):
    return node_values(circuit, point, field)[circuit.output]


# ------------------------------------------------------------ degree analysis


def node_degrees(circuit: Circuit) -> list[int]:
    degs: list[int] = []
    for node in circuit.nodes:
        k = node.kind
        if k == "const":
            degs.append(0)
        elif k == "var":
            degs.append(1)
        elif k == "sum" or k == "div":
            degs.append(max((degs[c] for c in node.children), default=0))
        else:
            degs.append(sum(degs[c] for c in node.children))
    return degs


def syntactic_degree(circuit: Circuit) -> int:
    return node_degrees(circuit)[circuit.output]


def fraction_degrees(circuit: Circuit) -> tuple[int, int]:
    """Degree bounds (numerator, denominator) of the output as a reduced-free fraction.

    For division-free circuits this is ``(syntactic_degree, 0)``. Used for the
    Schwartz-Zippel bound when comparing rational functions.
    """
    nd: list[tuple[int, int]] = []
    for node in circuit.nodes:
        k = node.kind
        if k == "const":
            nd.append((0, 0))
        elif k == "var":
            nd.append((1, 0))
        elif k == "sum":
            ch = [nd[c] for c in node.children]
            den = sum(d for _, d in ch)
            num = max((n + den - d for n, d in ch), default=0)
            nd.append((num, den))
        elif k == "prod":
            ch = [nd[c] for c in node.children]
            nd.append((sum(n for n, _ in ch), sum(d for _, d in ch)))
        else:
            (na, da), (nb, db) = nd[node.children[0]], nd[node.children[1]]
            nd.append((na + db, da + nb))
    return nd[circuit.output]


# ---------------------------------------------------------------- substitution


def _is_identity(name: str, c: Circuit) -> bool:
    node = c.nodes[c.output]
    return node.kind == "var" and node.var == name


def substitute(circuit: Circuit, mapping: Mapping[str, Circuit]) -> Circuit:
    """Replace variables by circuits; each replacement DAG is grafted once and shared."""
    mapping = {v: c for v, c in mapping.items() if not _is_identity(v, c)}
    if not mapping:
        return circuit
    b = CircuitBuilder()
    roots = {v: b.graft(c) for v, c in mapping.items()}
    keep = [v for v in circuit.variables if v not in mapping]
    out = b.graft(circuit, roots)
    extra = [v for c in mapping.values() for v in c.variables]
    return b.build(out, dict.fromkeys(keep + extra))


# ------------------------------------------------------------------- expansion

DEFAULT_BUDGET = 200_000


def expand(circuit: Circuit, monomial_budget: int = DEFAULT_BUDGET) -> SparsePolynomial:
    """Exact sparse expansion, computed bottom-up."""
    vals: list[SparsePolynomial] = []
    for i, node in enumerate(circuit.nodes):
        k = node.kind
        if k == "const":
            vals.append(SparsePolynomial.const(node.value))
        elif k == "var":
            vals.append(SparsePolynomial.var(node.var))
        elif k == "sum":
            acc: dict = {}
            for c, w in zip(node.children, node.weights):
                for m, coef in vals[c]._terms.items():
                    acc[m] = acc.get(m, Fraction(0)) + w * coef
            vals.append(SparsePolynomial(acc))
        elif k == "prod":
            acc_p = SparsePolynomial.const(1)
            for c in node.children:
                acc_p = acc_p.mul(vals[c], budget=monomial_budget)
            vals.append(acc_p)
        else:
            raise CircuitError(i, "division node in expansion")
        if len(vals[-1]) > monomial_budget:
            raise BudgetExceeded(f"expansion too large: node {i} has {len(vals[-1])} monomials")
    return vals[circuit.output]


# ------------------------------------------------------- randomized identity


@dataclass(frozen=True)
class IdentityVerdict:
    equal: bool
    trials: int
    mismatch: dict[str, int] | None
    degree: int
    per_trial_bound: Fraction

    @property
    def verdict(self) -> str:
        return "probably equal" if self.equal else "unequal"

    @property
    def failure_bound(self) -> Fraction:
        """Probability that ``equal`` is wrong (independent trials)."""
        return self.per_trial_bound ** self.trials if self.equal else Fraction(0)


def random_point_equal(
    c1: Circuit, c2: Circuit, trials: int = 20, seed: int = 0, max_resample: int = 64
) -> IdentityVerdict:
    """Schwartz-Zippel comparison of two circuits over GF(2^61 - 1).

    Trial ``t`` draws its point from the stream ``(seed, t, attempt)``; attempts
    are only advanced when a division node hits a zero denominator.
    """
    names = list(dict.fromkeys(c1.variables + c2.variables))
    rows1 = [names.index(v) for v in c1.variables]
    rows2 = [names.index(v) for v in c2.variables]
    n1, d1 = fraction_degrees(c1)
    n2, d2 = fraction_degrees(c2)
    degree = max(n1 + d2, n2 + d1, d1 + d2)
    X = np.empty((len(names), trials), dtype=np.uint64)
    pending = np.arange(trials)
    attempt = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        X[:, t] = uniform_points(stream(seed, t, 0), len(names))
    v1 = np.zeros(trials, dtype=np.uint64)
    v2 = np.zeros(trials, dtype=np.uint64)
    for _ in range(max_resample):
        sub = X[:, pending]
        a, bad1 = c1.fp_eval_batch(sub[rows1])
        b, bad2 = c2.fp_eval_batch(sub[rows2])
        bad = bad1 | bad2
        v1[pending[~bad]] = a[~bad]
        v2[pending[~bad]] = b[~bad]
        pending = pending[bad]
        if not len(pending):
            break
        for t in pending:
            attempt[t] += 1
            X[:, t] = uniform_points(stream(seed, t, int(attempt[t])), len(names))
    else:
        raise EvaluationError("denominator vanished on every resampled point")
    diff = np.nonzero(v1 != v2)[0]
    mismatch = None
    if len(diff):
        t = int(diff[0])
        mismatch = {v: int(X[i, t]) for i, v in enumerate(names)}
    return IdentityVerdict(not len(diff), trials, mismatch, degree, Fraction(degree, P))


def zero_test(circuit: Circuit, trials: int = 20, seed: int = 0) -> IdentityVerdict:
    return random_point_equal(circuit, const_circuit(0), trials, seed)


__all__ = [
    "BudgetExceeded",
    "Circuit",
    "CircuitBuilder",
    "CircuitError",
    "Const",
    "Div",
    "EvaluationError",
    "FieldError",
    "IdentityVerdict",
    "Node",
    "Prod",
    "Sum",
    "ValidationReport",
    "Var",
    "const_circuit",
    "evaluate",
    "expand",
    "fraction_degrees",
    "node_degrees",
    "node_values",
    "random_point_equal",
    "substitute",
    "syntactic_degree",
    "validate",
    "var_circuit",
    "zero_test",
]

