"""Probabilistic generating circuits and explicit distribution tables.

A PGC stores a distribution over categorical variables X_1..X_n as the
coefficients of its generating polynomial: the coefficient of
``z_1^j_1 ... z_n^j_n`` is ``Pr[X = (j_1, ..., j_n)]``. Whether a circuit really
computes such a polynomial is a semantic property; the only general check here
is :func:`check_distribution`, which expands the circuit and is exponential by
design.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .circuit import Circuit, CircuitBuilder, evaluate, expand
from .poly import BudgetExceeded, Monomial, SparsePolynomial, mono_str


@dataclass(frozen=True)
class Pgc:
    circuit: Circuit
    variables: tuple[str, ...]
    arity: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        ar = self.arity
        if isinstance(ar, int):
            ar = (ar,) * len(self.variables)
        ar = tuple(int(a) for a in ar)
        if len(ar) != len(self.variables):
            raise ValueError("one arity per variable required")
        if any(a < 2 for a in ar):
            raise ValueError("arity must be at least 2")
        if not self.circuit.division_free:
            raise ValueError("a PGC circuit must be division-free")
        object.__setattr__(self, "arity", ar)

    @classmethod
    def binary(cls, circuit: Circuit, variables: Sequence[str] | None = None) -> Pgc:
        variables = tuple(variables) if variables is not None else circuit.variables
        return cls(circuit, variables, 2)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def is_binary(self) -> bool:
        return all(a == 2 for a in self.arity)

    @property
    def max_arity(self) -> int:
        return max(self.arity, default=2)


@dataclass(frozen=True)
class DistributionTable:
    """Joint distribution on {0..d-1}^n; absent tuples have probability 0."""

    n: int
    d: int
    probabilities: Mapping[tuple[int, ...], Fraction] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in self.probabilities.items():
            v = Fraction(v)
            k = tuple(int(j) for j in k)
            if len(k) != self.n or any(not 0 <= j < self.d for j in k):
                raise ValueError(f"tuple {k} outside {{0..{self.d - 1}}}^{self.n}")
            if v < 0:
                raise ValueError(f"negative probability at {k}")
            if v:
                clean[k] = v
        if sum(clean.values(), Fraction(0)) != 1:
            raise ValueError("probabilities do not sum to 1")
        object.__setattr__(self, "probabilities", dict(sorted(clean.items())))

    def __getitem__(self, key: Sequence[int]) -> Fraction:
        return self.probabilities.get(tuple(key), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, DistributionTable):
            return NotImplemented
        return (self.n, self.d, self.probabilities) == (other.n, other.d, other.probabilities)

    def items(self):
        return self.probabilities.items()

    def dense(self):
        for key in itertools.product(range(self.d), repeat=self.n):
            yield key, self[key]


@dataclass(frozen=True)
class Witness:
    kind: str
    monomial: Monomial | None = None
    coefficient: Fraction | None = None

    def __str__(self) -> str:
        if self.monomial is None:
            return f"{self.kind}: {self.coefficient}"
        return f"{self.kind}: {self.coefficient} * {mono_str(self.monomial)}"


@dataclass(frozen=True)
class DistributionCheck:
    valid: bool
    table: DistributionTable | None = None
    witness: Witness | None = None


def check_distribution(pgc: Pgc, monomial_budget: int = 200_000) -> DistributionCheck:
    """Expand ``pgc`` and decide whether it is a probability generating polynomial."""
    try:
        poly = expand(pgc.circuit, monomial_budget)
    except BudgetExceeded as exc:
        raise BudgetExceeded(f"instance too large for brute force ({exc})") from None
    return check_polynomial(poly, pgc.variables, pgc.arity)


def check_polynomial(
    poly: SparsePolynomial, variables: Sequence[str], arity: Sequence[int] | int
) -> DistributionCheck:
    variables = tuple(variables)
    if isinstance(arity, int):
        arity = (arity,) * len(variables)
    pos = {v: i for i, v in enumerate(variables)}
    probs: dict[tuple[int, ...], Fraction] = {}
    for m, c in poly.items():
        key = [0] * len(variables)
        for v, e in m:
            if v not in pos:
                return DistributionCheck(False, witness=Witness("unknown variable", m, c))
            if e >= arity[pos[v]]:
                return DistributionCheck(False, witness=Witness("exponent >= arity", m, c))
            key[pos[v]] = e
        if c < 0:
            return DistributionCheck(False, witness=Witness("negative coefficient", m, c))
        probs[tuple(key)] = c
    total = sum(probs.values(), Fraction(0))
    if total != 1:
        return DistributionCheck(False, witness=Witness("coefficients do not sum to 1", None, total))
    return DistributionCheck(True, DistributionTable(len(variables), max(arity, default=2), probs))


def table_to_pgc(table: DistributionTable, variables: Sequence[str] | None = None) -> Pgc:
    """Dense sum-of-products circuit for the generating polynomial of ``table``."""
    variables = tuple(variables) if variables is not None else tuple(f"z{i + 1}" for i in range(table.n))
    b = CircuitBuilder(variables)
    entries = list(table.items())
    if entries == [((0,) * table.n, Fraction(1))]:
        return Pgc(b.build(b.const(1)), variables, table.d)
    terms, weights = [], []
    for key, p in entries:
        factors = [b.var(v) for v, j in zip(variables, key) for _ in range(j)]
        terms.append(b.mul(factors) if factors else b.const(1))
        weights.append(p)
    return Pgc(b.build(b.add(terms, weights)), variables, table.d)


def selective_marginal_oracle(table: DistributionTable, sets: Sequence[Sequence[int]]) -> Fraction:
    """Pr[X_1 in V_1, ..., X_n in V_n] by summing table entries."""
    if len(sets) != table.n:
        raise ValueError("one set per variable required")
    sets = [frozenset(s) for s in sets]
    return sum(
        (p for key, p in table.items() if all(j in s for j, s in zip(key, sets))),
        Fraction(0),
    )


def normalize(pgc: Pgc) -> tuple[Pgc, Fraction]:
    """Scale an unnormalized generating circuit by 1/f(1, ..., 1)."""
    total = evaluate(pgc.circuit, {v: 1 for v in pgc.circuit.variables})
    if total == 0:
        raise ZeroDivisionError("generating polynomial sums to 0")
    b = CircuitBuilder()
    root = b.graft(pgc.circuit)
    out = b.add([root], [1 / total])
    return Pgc(b.build(out, pgc.circuit.variables), pgc.variables, pgc.arity), total
