"""Distribution-preserving compositions of set-multilinear PCs.

Random variable ``i`` with arity ``d`` is represented by the slots
``z{i}_0 .. z{i}_{d-1}``; scopes are sets of these global indices, so
disjointness is a syntactic check and collisions are errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .circuit import Circuit, CircuitBuilder
from .marginal import VariablePartition
from .pgc import DistributionTable, Pgc

_SLOT = re.compile(r"^z(\d+)_(\d+)$")


def slot(i: int, j: int) -> str:
    return f"z{i}_{j}"


class ScopeError(ValueError):
    pass


@dataclass(frozen=True)
class ScopedDistributionCircuit:
    circuit: Circuit
    scope: tuple[int, ...]
    arity: int

    def __post_init__(self):
        scope = tuple(sorted(set(self.scope)))
        if len(scope) != len(self.scope):
            raise ScopeError("repeated scope index")
        if not self.circuit.division_free:
            raise ValueError("composition inputs must be division-free")
        allowed = {slot(i, j) for i in scope for j in range(self.arity)}
        stray = [v for v in self.circuit.variables if v not in allowed]
        if stray:
            raise ScopeError(f"variables outside the scope: {stray}")
        object.__setattr__(self, "scope", scope)

    @property
    def partition(self) -> VariablePartition:
        return VariablePartition(tuple(tuple(slot(i, j) for j in range(self.arity)) for i in self.scope))

    @property
    def size(self) -> int:
        return self.circuit.size

    @classmethod
    def from_partition(cls, circuit: Circuit, partition: VariablePartition) -> ScopedDistributionCircuit:
        """Recover scope and arity from ``z{i}_{j}`` slot names."""
        scope = []
        arities = set()
        for part in partition.parts:
            idx = set()
            for j, v in enumerate(part):
                m = _SLOT.match(v)
                if not m or int(m.group(2)) != j:
                    raise ScopeError(f"part {part} does not use z<i>_<j> slot names in order")
                idx.add(int(m.group(1)))
            if len(idx) != 1:
                raise ScopeError(f"part {part} mixes random variables")
            scope.append(idx.pop())
            arities.add(len(part))
        if len(arities) > 1:
            raise ScopeError("parts have different arities")
        return cls(circuit, tuple(scope), arities.pop() if arities else 2)


def _variables(scope, d):
    return [slot(i, j) for i in sorted(scope) for j in range(d)]


def _uniform_factor(b: CircuitBuilder, i: int, d: int) -> int:
    return b.add([b.var(slot(i, j)) for j in range(d)], [Fraction(1, d)] * d)


def leaf_distribution(i: int, weights: Sequence) -> ScopedDistributionCircuit:
    """The linear form sum_j w_j z{i}_j for Pr[X_i = j] = w_j."""
    weights = [Fraction(w) for w in weights]
    if len(weights) < 2:
        raise ValueError("need at least two outcomes")
    if any(w < 0 for w in weights) or sum(weights) != 1:
        raise ValueError("weights must be nonnegative and sum to 1")
    d = len(weights)
    b = CircuitBuilder(_variables([i], d))
    kids = [b.var(slot(i, j)) for j in range(d)]
    return ScopedDistributionCircuit(b.build(b.add(kids, weights)), (i,), d)


def table_distribution(table: DistributionTable, scope: Sequence[int]) -> ScopedDistributionCircuit:
    """Sum over the support of p(a) * prod_k z{scope[k]}_{a_k}."""
    scope = tuple(scope)
    if len(scope) != table.n:
        raise ScopeError(f"table has {table.n} variables, scope has {len(scope)}")
    names = _variables(scope, table.d)
    b = CircuitBuilder(names)
    terms, weights = [], []
    for key, p in table.items():
        terms.append(b.mul([b.var(slot(i, j)) for i, j in zip(scope, key)]))
        weights.append(p)
    return ScopedDistributionCircuit(b.build(b.add(terms, weights), names), scope, table.d)


def generating_pgc(f: ScopedDistributionCircuit) -> Pgc:
    """Read slots as exponents, z{i}_{j} -> z{i}^j, giving a PGC over the scope.

    For set-multilinear input this is a bijection on monomials, so the result
    is a distribution exactly when ``f`` is.
    """
    names = [f"z{i}" for i in f.scope]
    b = CircuitBuilder(names)
    repl = {}
    for i in f.scope:
        for j in range(f.arity):
            repl[slot(i, j)] = b.mul([b.var(f"z{i}")] * j) if j else b.const(1)
    root = b.graft(f.circuit, repl)
    return Pgc(b.build(root, names), names, f.arity)


def extend_smooth(f: ScopedDistributionCircuit, new_scope: Sequence[int]) -> ScopedDistributionCircuit:
    """Multiply in an independent uniform factor for every index of ``new_scope`` not in scope."""
    new_scope = tuple(sorted(set(new_scope)))
    if not set(f.scope) <= set(new_scope):
        raise ScopeError("new scope must contain the old one")
    added = [i for i in new_scope if i not in f.scope]
    if not added:
        return f
    b = CircuitBuilder(_variables(new_scope, f.arity))
    root = b.graft(f.circuit)
    factors = [_uniform_factor(b, i, f.arity) for i in added]
    return ScopedDistributionCircuit(b.build(b.mul([root, *factors])), new_scope, f.arity)


def mixture(f: ScopedDistributionCircuit, g: ScopedDistributionCircuit, alpha) -> ScopedDistributionCircuit:
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError("mixture weight must lie in [0, 1]")
    if f.arity != g.arity:
        raise ScopeError("arities differ")
    scope = tuple(sorted(set(f.scope) | set(g.scope)))
    fe = extend_smooth(f, scope)
    ge = extend_smooth(g, scope)
    b = CircuitBuilder(_variables(scope, f.arity))
    r1 = b.graft(fe.circuit)
    r2 = b.graft(ge.circuit)
    return ScopedDistributionCircuit(b.build(b.add([r1, r2], [alpha, 1 - alpha])), scope, f.arity)


def product(f: ScopedDistributionCircuit, g: ScopedDistributionCircuit) -> ScopedDistributionCircuit:
    if set(f.scope) & set(g.scope):
        raise ScopeError("scopes not disjoint")
    if f.arity != g.arity:
        raise ScopeError("arities differ")
    scope = tuple(sorted(set(f.scope) | set(g.scope)))
    b = CircuitBuilder(_variables(scope, f.arity))
    r1 = b.graft(f.circuit)
    r2 = b.graft(g.circuit)
    return ScopedDistributionCircuit(b.build(b.mul([r1, r2])), scope, f.arity)


def hierarchical(
    f: ScopedDistributionCircuit, gs: Sequence[ScopedDistributionCircuit]
) -> ScopedDistributionCircuit:
    """Replace z_i by g_i and zbar_i by the uniform distribution on g_i's block.

    ``f`` is binary; its k-th scope index (in sorted order) is paired with
    ``gs[k]``, slot 1 playing z_k and slot 0 playing zbar_k.
    """
    if f.arity != 2:
        raise ScopeError("the outer distribution must be binary")
    if len(gs) != len(f.scope):
        raise ScopeError(f"need {len(f.scope)} inner distributions, got {len(gs)}")
    if not gs:
        return f
    d = gs[0].arity
    m = len(gs[0].scope)
    seen: set[int] = set()
    for g in gs:
        if g.arity != d or len(g.scope) != m:
            raise ScopeError("inner distributions must share arity and block size")
        if seen & set(g.scope):
            raise ScopeError("scope collision between inner distributions")
        seen |= set(g.scope)
    scope = tuple(sorted(seen))
    b = CircuitBuilder(_variables(scope, d))
    subst = {}
    for i, g in zip(f.scope, gs):
        subst[slot(i, 1)] = b.graft(g.circuit)
        subst[slot(i, 0)] = b.mul([_uniform_factor(b, j, d) for j in g.scope])
    root = b.graft(f.circuit, subst)
    return ScopedDistributionCircuit(b.build(root, _variables(scope, d)), scope, d)
