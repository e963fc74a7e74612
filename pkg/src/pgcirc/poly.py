"""Sparse multivariate polynomials with exact rational coefficients.

This is the brute-force ground truth that every circuit transformation in the
package is checked against. A monomial is a sorted tuple of ``(variable,
exponent)`` pairs with positive exponents; the constant monomial is ``()``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Mapping

Monomial = tuple[tuple[str, int], ...]

ONE: Monomial = ()


class BudgetExceeded(RuntimeError):
    """Raised when an expansion would exceed its monomial budget."""


def monomial(**exps: int) -> Monomial:
    return tuple(sorted((v, e) for v, e in exps.items() if e))


def mono(*factors: str | tuple[str, int]) -> Monomial:
    """Monomial from factors: ``mono("x1", "x1", ("y", 2))`` is x1^2 y^2."""
    acc: dict[str, int] = {}
    for f in factors:
        name, e = (f, 1) if isinstance(f, str) else f
        acc[name] = acc.get(name, 0) + e
    return tuple(sorted((v, e) for v, e in acc.items() if e))


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for v, e in b:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_str(m: Monomial) -> str:
    if not m:
        return "1"
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


class SparsePolynomial:
    """Immutable map monomial -> nonzero Fraction."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction | int] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[m] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def const(cls, c: Fraction | int) -> SparsePolynomial:
        return cls({ONE: c})

    @classmethod
    def var(cls, name: str) -> SparsePolynomial:
        return cls({((name, 1),): 1})

    @classmethod
    def from_dict(cls, d: Mapping[str, Fraction | int]) -> SparsePolynomial:
        """Build from ``{"x1*x2": 3/5, "1": 1/6}``-style keys."""
        out: dict[Monomial, Fraction] = {}
        for key, c in d.items():
            if key.strip() == "1":
                m = ONE
            else:
                factors = []
                for part in key.split("*"):
                    name, _, e = part.partition("^")
                    factors.append((name.strip(), int(e) if e else 1))
                m = mono(*factors)
            out[m] = out.get(m, Fraction(0)) + Fraction(c)
        return cls(out)

    # -- mapping protocol
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items(), key=lambda t: _mono_key(t[0])))

    def __len__(self) -> int:
        return len(self._terms)

    def __getitem__(self, m: Monomial) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def coefficient(self, m: Monomial) -> Fraction:
        return self._terms.get(m, Fraction(0))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = SparsePolynomial.const(other)
        if not isinstance(other, SparsePolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"SparsePolynomial({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*{mono_str(m)}" if m else str(c) for m, c in self.items())

    # -- arithmetic
    def __add__(self, other: SparsePolynomial | int | Fraction) -> SparsePolynomial:
        other = _coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return SparsePolynomial(out)

    __radd__ = __add__

    def __neg__(self) -> SparsePolynomial:
        return SparsePolynomial({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: SparsePolynomial | int | Fraction) -> SparsePolynomial:
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def scale(self, c: Fraction | int) -> SparsePolynomial:
        c = Fraction(c)
        return SparsePolynomial({m: c * v for m, v in self._terms.items()})

    def __mul__(self, other: SparsePolynomial | int | Fraction) -> SparsePolynomial:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return self.mul(other)

    __rmul__ = __mul__

    def mul(self, other: SparsePolynomial, budget: int | None = None) -> SparsePolynomial:
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = mono_mul(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
            if budget is not None and len(out) > budget:
                raise BudgetExceeded(f"expansion too large: more than {budget} monomials")
        return SparsePolynomial(out)

    def __pow__(self, k: int) -> SparsePolynomial:
        out = SparsePolynomial.const(1)
        for _ in range(k):
            out = out.mul(self)
        return out

    # -- queries
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((mono_degree(m) for m in self._terms), default=-1)

    def variables(self) -> set[str]:
        return {v for m in self._terms for v, _ in m}

    def exponent(self, m: Monomial, var: str) -> int:
        return dict(m).get(var, 0)

    def evaluate(self, point: Mapping[str, Fraction | int]) -> Fraction:
        total = Fraction(0)
        for m, c in self._terms.items():
            term = c
            for v, e in m:
                term *= Fraction(point[v]) ** e
            total += term
        return total

    def substitute(self, mapping: Mapping[str, SparsePolynomial]) -> SparsePolynomial:
        out = SparsePolynomial()
        for m, c in self._terms.items():
            term = SparsePolynomial.const(c)
            for v, e in m:
                base = mapping.get(v)
                if base is None:
                    base = SparsePolynomial.var(v)
                for _ in range(e):
                    term = term.mul(base)
            out = out + term
        return out

    def truncate(self, max_degree: int) -> SparsePolynomial:
        return SparsePolynomial({m: c for m, c in self._terms.items() if mono_degree(m) <= max_degree})

    def coefficient_sum(self) -> Fraction:
        return sum(self._terms.values(), Fraction(0))


def _coerce(x) -> SparsePolynomial:
    if isinstance(x, SparsePolynomial):
        return x
    return SparsePolynomial.const(x)


def _mono_key(m: Monomial):
    return (mono_degree(m), m)


def poly_sum(polys: Iterable[SparsePolynomial]) -> SparsePolynomial:
    out: dict[Monomial, Fraction] = {}
    for p in polys:
        for m, c in p._terms.items():
            out[m] = out.get(m, Fraction(0)) + c
    return SparsePolynomial(out)
