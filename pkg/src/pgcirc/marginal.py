"""Marginals of set-multilinear PCs by a single evaluation at an indicator point."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .circuit import Circuit, evaluate


@dataclass(frozen=True)
class VariablePartition:
    """Ordered, disjoint parts; slot ``j`` of part ``i`` stands for the event X_i = j."""

    parts: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        parts = tuple(tuple(p) for p in self.parts)
        seen: set[str] = set()
        for p in parts:
            for v in p:
                if v in seen:
                    raise ValueError(f"variable {v!r} appears in two parts")
                seen.add(v)
        object.__setattr__(self, "parts", parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i: int) -> tuple[str, ...]:
        return self.parts[i]

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for p in self.parts for v in p)

    def part_of(self, var: str) -> int:
        for i, p in enumerate(self.parts):
            if var in p:
                return i
        raise KeyError(var)

    def covers(self, names: Iterable[str]) -> bool:
        return set(names) <= set(self.variables)


@dataclass(frozen=True)
class MarginalQuery:
    sets: tuple[frozenset[int], ...]

    def __init__(self, sets: Sequence[Iterable[int]]):
        object.__setattr__(self, "sets", tuple(frozenset(int(j) for j in s) for s in sets))

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def empty_parts(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sets) if not s)

    @classmethod
    def elementary(cls, values: Sequence[int]) -> MarginalQuery:
        return cls([[v] for v in values])


def indicator_point(query: MarginalQuery, partition: VariablePartition) -> dict[str, int]:
    """``v[i][j] = 1`` if j is in A_i, else 0. Empty sets give an all-zero part."""
    if len(query) != len(partition):
        raise ValueError(f"query has {len(query)} sets, partition has {len(partition)} parts")
    point: dict[str, int] = {}
    for i, (s, part) in enumerate(zip(query.sets, partition.parts)):
        if s and max(s) >= len(part):
            raise ValueError(f"set {i + 1} mentions value {max(s)} but the part has arity {len(part)}")
        if s and min(s) < 0:
            raise ValueError(f"negative value in set {i + 1}")
        for j, v in enumerate(part):
            point[v] = 1 if j in s else 0
    return point


@lru_cache(maxsize=64)
def _sml_verdict(pc: Circuit, partition: VariablePartition, seed: int) -> bool:
    from .smltest import test_set_multilinear

    return test_set_multilinear(pc, partition, seed=seed).accepted


class NotSetMultilinear(ValueError):
    pass


def marginalize_smlpc(
    pc: Circuit,
    partition: VariablePartition,
    query: MarginalQuery,
    paranoid: bool = False,
    seed: int = 0,
) -> Fraction:
    """Pr[X_1 in A_1, ..., X_n in A_n] for a PC computing a set-multilinear distribution.

    One circuit evaluation. The set-multilinearity and distribution claims are
    the caller's; ``paranoid=True`` runs the randomized tester once per
    (circuit, partition) and caches the verdict.
    """
    if paranoid and not _sml_verdict(pc, partition, seed):
        raise NotSetMultilinear("circuit is not set-multilinear with respect to the partition")
    point = indicator_point(query, partition)
    if query.empty_parts:
        return Fraction(0)
    missing = [v for v in pc.variables if v not in point]
    if missing:
        raise ValueError(f"variables outside the partition: {missing}")
    return evaluate(pc, point)


def marginalize_pgc_binary(pgc, query: MarginalQuery) -> Fraction:
    """Compile a binary PGC (cached) and marginalize the resulting PC."""
    compiled = _compiled(pgc)
    return marginalize_smlpc(compiled.circuit, compiled.partition, query)


@lru_cache(maxsize=64)
def _compiled(pgc):
    from .compiler import compile_pgc_to_smlpc

    return compile_pgc_to_smlpc(pgc)
