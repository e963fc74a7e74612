"""Seeded random instances: binary PGCs, set-multilinear PCs, formulas, ABPs.

Every generator takes a ``numpy.random.Generator`` so callers control the
stream; :func:`pgcirc.field.stream` gives one per (seed, index).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .circuit import Circuit, CircuitBuilder, expand
from .compiler import binary_partition, negative_literal, positive_literal
from .dpp import Abp, FAdd, FConst, FMul, Formula, FVar
from .marginal import MarginalQuery, VariablePartition
from .pgc import Pgc


def _prob(rng: np.random.Generator, lo: int = 1, hi: int = 9) -> Fraction:
    """A rational strictly inside (0, 1)."""
    q = int(rng.integers(lo + 1, hi + 1))
    return Fraction(int(rng.integers(1, q)), q)


def _weight(rng: np.random.Generator, allow_negative: bool = True) -> Fraction:
    w = Fraction(int(rng.integers(1, 10)), int(rng.integers(1, 6)))
    return -w if allow_negative and rng.random() < 0.3 else w


# ------------------------------------------------------------------ binary PGCs


def _leaf_product(b: CircuitBuilder, rng, block: Sequence[int]) -> int:
    factors = []
    for i in block:
        p = _prob(rng)
        factors.append(b.add([b.const(1), b.var(f"z{i}")], [1 - p, p]))
    return factors[0] if len(factors) == 1 else b.mul(factors)


def _leaf_poly_coeffs(ps: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients (indexed by subset bitmask) of prod_i ((1 - p_i) + p_i z_i)."""
    coeffs = [Fraction(1)]
    for p in ps:
        coeffs = [c * (1 - p) for c in coeffs] + [c * p for c in coeffs]
    return coeffs


def _nonmonotone_block(b: CircuitBuilder, rng, block: Sequence[int]) -> int:
    """``(1 + t) f1 - t f2`` for two product distributions on ``block``, t chosen to keep coefficients >= 0."""
    p1 = [_prob(rng) for _ in block]
    p2 = [_prob(rng) for _ in block]
    c1, c2 = _leaf_poly_coeffs(p1), _leaf_poly_coeffs(p2)
    bounds = [a / (c - a) for a, c in zip(c1, c2) if c > a]
    t = min(bounds) / 2 if bounds else Fraction(1, 2)

    def product(ps):
        fs = [b.add([b.const(1), b.var(f"z{i}")], [1 - p, p]) for i, p in zip(block, ps)]
        return fs[0] if len(fs) == 1 else b.mul(fs)

    return b.add([product(p1), product(p2)], [1 + t, -t])


def random_binary_pgc(rng: np.random.Generator, n: int, max_nodes: int = 40) -> Pgc:
    """A valid binary PGC on z1..zn, built from independent blocks, mixtures and nonmonotone gadgets."""
    names = [f"z{i}" for i in range(1, n + 1)]
    for _ in range(100):
        b = CircuitBuilder(names)
        order = [int(i) + 1 for i in rng.permutation(n)]
        blocks = []
        while order:
            k = int(rng.integers(1, min(3, len(order)) + 1))
            blocks.append(order[:k])
            order = order[k:]
        roots = []
        for block in blocks:
            r = rng.random()
            if r < 0.35:
                roots.append(_nonmonotone_block(b, rng, block))
            elif r < 0.6:
                a = _prob(rng)
                roots.append(b.add([_leaf_product(b, rng, block), _leaf_product(b, rng, block)], [a, 1 - a]))
            else:
                roots.append(_leaf_product(b, rng, block))
        root = roots[0] if len(roots) == 1 else b.mul(roots)
        if rng.random() < 0.3:
            a = _prob(rng)
            root = b.add([root, _leaf_product(b, rng, list(range(1, n + 1)))], [a, 1 - a])
        if len(b) <= max_nodes:
            return Pgc.binary(b.build(root, names))
    raise RuntimeError("could not fit a random PGC in the node budget")


def random_binary_query(rng: np.random.Generator, n: int) -> MarginalQuery:
    choices = ([0], [1], [0, 1])
    return MarginalQuery([choices[int(rng.integers(0, 3))] for _ in range(n)])


# ------------------------------------------------------------------ set-multilinear PCs


def slot_partition(n: int, d: int) -> VariablePartition:
    return VariablePartition(tuple(tuple(f"y{i}_{j}" for j in range(d)) for i in range(1, n + 1)))


def _sml(b: CircuitBuilder, rng, parts: Sequence[Sequence[str]], width: int) -> int:
    if len(parts) == 1:
        part = parts[0]
        return b.add([b.var(v) for v in part], [_weight(rng) for _ in part])
    cut = int(rng.integers(1, len(parts)))
    left, right = parts[:cut], parts[cut:]
    k = int(rng.integers(1, width + 1))
    terms = [b.mul([_sml(b, rng, left, 1), _sml(b, rng, right, 1)]) for _ in range(k)]
    return terms[0] if k == 1 else b.add(terms, [_weight(rng) for _ in terms])


def random_sml_circuit(
    rng: np.random.Generator, n: int, d: int = 2, width: int = 2
) -> tuple[Circuit, VariablePartition]:
    """A (possibly nonmonotone) circuit that is set-multilinear by construction."""
    part = slot_partition(n, d)
    b = CircuitBuilder(part.variables)
    root = _sml(b, rng, list(part.parts), width)
    return b.build(root, part.variables), part


@dataclass(frozen=True)
class PlantedViolation:
    circuit: Circuit
    partition: VariablePartition
    kind: str
    part: int


def plant_violation(rng: np.random.Generator, n: int, d: int = 2, kind: str | None = None) -> PlantedViolation:
    """A set-multilinear circuit plus exactly one offending term.

    ``missing-part`` adds a term without part i, ``cross`` a term with two
    distinct variables of part i, ``square`` a term with a squared variable.
    """
    part = slot_partition(n, d)
    b = CircuitBuilder(part.variables)
    root = _sml(b, rng, list(part.parts), 2)
    kinds = ["missing-part", "cross", "square"] if n > 1 else ["cross", "square"]
    kind = kind or kinds[int(rng.integers(0, len(kinds)))]
    i = int(rng.integers(0, n))
    rest = [p for k, p in enumerate(part.parts) if k != i]
    rest_node = _sml(b, rng, rest, 1) if rest else None
    a, c = (int(x) for x in rng.choice(d, size=2, replace=False))
    if kind == "missing-part":
        if rest_node is None:
            raise ValueError("missing-part violation needs n >= 2")
        bad = rest_node
    elif kind == "cross":
        fs = [b.var(part.parts[i][a]), b.var(part.parts[i][c])]
        bad = b.mul(fs + ([rest_node] if rest_node is not None else []))
    elif kind == "square":
        v = b.var(part.parts[i][a])
        bad = b.mul([v, v] + ([rest_node] if rest_node is not None else []))
    else:
        raise ValueError(f"unknown violation kind {kind!r}")
    out = b.add([root, bad], [1, _weight(rng, allow_negative=False)])
    return PlantedViolation(b.build(out, part.variables), part, kind, i)


def mixture_of_products_pc(rng: np.random.Generator, n: int, k: int) -> tuple[Circuit, VariablePartition]:
    """Smooth, decomposable PC over (xb_i, x_i): a k-component mixture of product distributions.

    Size grows linearly in k at fixed n.
    """
    part = binary_partition(n)
    b = CircuitBuilder(part.variables)
    comps = []
    for _ in range(k):
        fs = []
        for i in range(1, n + 1):
            p = _prob(rng)
            fs.append(b.add([b.var(negative_literal(i)), b.var(positive_literal(i))], [1 - p, p]))
        comps.append(b.mul(fs))
    ws = [Fraction(int(rng.integers(1, 10))) for _ in comps]
    total = sum(ws)
    return b.build(b.add(comps, [w / total for w in ws]), part.variables), part


# ------------------------------------------------------------------ formulas and ABPs


def random_formula(rng: np.random.Generator, max_nodes: int = 25, variables: Sequence[str] = ("x", "y", "z", "w")) -> Formula:
    """Random binary tree with at most ``max_nodes`` nodes (leaves included)."""
    leaves = int(rng.integers(1, (max_nodes + 1) // 2 + 1))

    def build(k: int) -> Formula:
        if k == 1:
            if rng.random() < 0.7:
                return FVar(variables[int(rng.integers(0, len(variables)))])
            return FConst(Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))))
        cut = int(rng.integers(1, k))
        op = FAdd if rng.random() < 0.5 else FMul
        return op(build(cut), build(k - cut))

    return build(leaves)


def random_abp(
    rng: np.random.Generator, width: int = 3, depth: int = 4, variables: Sequence[str] = ("x", "y", "z")
) -> Abp:
    """Layered ABP: s, ``depth - 1`` inner layers of up to ``width`` nodes, t."""
    layers = [("s",)]
    for k in range(1, depth):
        w = int(rng.integers(1, width + 1))
        layers.append(tuple(f"a{k}_{j}" for j in range(1, w + 1)))
    layers.append(("t",))
    edges = []
    for k in range(depth):
        for u in layers[k]:
            for v in layers[k + 1]:
                if rng.random() < 0.75:
                    if rng.random() < 0.7:
                        label = variables[int(rng.integers(0, len(variables)))]
                    else:
                        label = Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 3)))
                    edges.append((u, v, label))
    return Abp(tuple(layers), tuple(edges))


def random_point(rng: np.random.Generator, names: Sequence[str]) -> dict[str, Fraction]:
    return {v: Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 6))) for v in names}


def expansion_size(c: Circuit, budget: int = 200_000) -> int:
    return len(list(expand(c, budget).items()))
