"""Small named instances used as golden examples and CLI fixtures."""

from __future__ import annotations

from fractions import Fraction

from .circuit import Circuit, CircuitBuilder
from .pgc import DistributionTable, Pgc

F = Fraction


def two_coin_table() -> DistributionTable:
    """Pr[X1=a, X2=b] with rows X2: (1/6, 1/6) for X2=0 and (1/3, 1/3) for X2=1."""
    return DistributionTable(
        2, 2, {(0, 0): F(1, 6), (1, 0): F(1, 6), (0, 1): F(1, 3), (1, 1): F(1, 3)}
    )


def two_coin_pc() -> Circuit:
    """Decomposable, smooth PC over x1, xb1, x2, xb2 for :func:`two_coin_table`."""
    b = CircuitBuilder(["x1", "xb1", "x2", "xb2"])
    x1, xb1, x2, xb2 = (b.var(v) for v in ("x1", "xb1", "x2", "xb2"))
    left = b.add([x1, xb1])
    mid = b.add([xb2, x2], [1, 2])
    right = b.add([x2, xb2], [1, F(1, 2)])
    p = b.mul([left, mid])
    q = b.mul([left, right])
    return b.build(b.add([p, q], [F(1, 12), F(1, 6)]))


def two_coin_pc_partition():
    from .marginal import VariablePartition

    return VariablePartition((("xb1", "x1"), ("xb2", "x2")))


def two_coin_pgc() -> Pgc:
    """Nonmonotone PGC (a -1 edge weight) for :func:`two_coin_table`."""
    b = CircuitBuilder(["z1", "z2"])
    one = b.const(1)
    z1 = b.var("z1")
    z2 = b.var("z2")
    left = b.add([one, z2], [1, 2])
    mid = b.add([z1, one])
    right = b.add([z2, one], [1, F(1, 2)])
    p = b.mul([left, mid])
    q = b.mul([mid, right])
    return Pgc.binary(b.build(b.add([p, q], [F(2, 3), -1])), ("z1", "z2"))


def strassen_example_pgc() -> Pgc:
    """f = 3/5 z1 z2 + 2/5 z1."""
    b = CircuitBuilder(["z1", "z2"])
    z1, z2 = b.var("z1"), b.var("z2")
    return Pgc.binary(b.build(b.add([b.mul([z1, z2]), z1], [F(3, 5), F(2, 5)])), ("z1", "z2"))


def constant_pgc(n: int) -> Pgc:
    names = tuple(f"z{i + 1}" for i in range(n))
    b = CircuitBuilder(names)
    return Pgc.binary(b.build(b.const(1)), names)
