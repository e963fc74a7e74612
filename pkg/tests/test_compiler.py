from __future__ import annotations

from fractions import Fraction

import pytest

from pgcirc.circuit import CircuitBuilder, evaluate, expand, random_point_equal, validate
from pgcirc.compiler import (
    BadShiftPoint,
    CompileError,
    binary_partition,
    compile_pgc_to_smlpc,
    eliminate_divisions,
    ratio_substitute,
    reflection,
    taylor_shift,
)
from pgcirc.corpus import random_binary_pgc
from pgcirc.field import stream
from pgcirc.gallery import constant_pgc, strassen_example_pgc, two_coin_pgc
from pgcirc.pgc import Pgc, check_distribution
from pgcirc.poly import SparsePolynomial
from pgcirc.smltest import test_set_multilinear

F = Fraction


def poly(d):
    return SparsePolynomial.from_dict(d)


def test_strassen_example_end_to_end():
    pc, part = compile_pgc_to_smlpc(strassen_example_pgc())
    assert expand(pc) == poly({"x1*x2": F(3, 5), "x1*xb2": F(2, 5)})
    assert part == binary_partition(2)


def test_two_coin_pgc_compiles_to_the_table():
    pc, _ = compile_pgc_to_smlpc(two_coin_pgc())
    assert expand(pc) == poly({"xb1*xb2": F(1, 6), "x1*xb2": F(1, 6), "xb1*x2": F(1, 3), "x1*x2": F(1, 3)})


def test_constant_pgc_compiles_to_all_bars():
    pc, _ = compile_pgc_to_smlpc(constant_pgc(3))
    assert expand(pc) == poly({"xb1*xb2*xb3": 1})


def test_ratio_substitution_agrees_with_compiled_form():
    pgc = two_coin_pgc()
    g = ratio_substitute(pgc)
    assert not g.division_free
    pc, _ = compile_pgc_to_smlpc(pgc)
    assert random_point_equal(g, pc, trials=20, seed=2).equal


def test_shift_of_strassen_example_and_intermediate_expansion():
    g = ratio_substitute(strassen_example_pgc())
    shift = reflection(["xb1", "xb2"])
    shifted = taylor_shift(g, shift)
    point = {"x1": F(2), "x2": F(3), "xb1": F(1, 5), "xb2": F(2, 7)}
    unshifted = {**point, "xb1": 1 - point["xb1"], "xb2": 1 - point["xb2"]}
    assert evaluate(shifted, point) == evaluate(g, unshifted)
    eliminated = eliminate_divisions(shifted, 2)
    assert eliminated.division_free
    assert expand(eliminated) == poly({"x1*x2": F(3, 5), "x1": F(2, 5), "x1*xb2": F(-2, 5)})


def test_empty_shift_is_identity():
    c = two_coin_pgc().circuit
    assert taylor_shift(c, {}) is c


def test_zero_denominator_is_a_bad_shift_point():
    b = CircuitBuilder(["x"])
    zero = b.add([b.var("x"), b.var("x")], [1, -1])
    c = b.build(b.div(b.const(1), zero))
    for shift in ({"x": (F(1), -1)}, {"x": (F(5), 1)}):
        with pytest.raises(BadShiftPoint, match="bad shift point"):
            taylor_shift(c, shift)
    with pytest.raises(BadShiftPoint):
        eliminate_divisions(c, 2)


def test_elimination_cancellation_and_geometric_series():
    b = CircuitBuilder(["x", "u"])
    one_minus_u = b.add([b.const(1), b.var("u")], [1, -1])
    c = b.build(b.mul([b.div(b.var("x"), one_minus_u), one_minus_u]))
    assert expand(eliminate_divisions(c, 1)) == poly({"x": 1})
    b = CircuitBuilder(["u"])
    den = b.add([b.const(1), b.var("u")], [1, -1])
    c = b.build(b.div(b.const(1), den))
    assert expand(eliminate_divisions(c, 3)) == poly({"1": 1, "u": 1, "u^2": 1, "u^3": 1})


def test_shift_is_an_involution():
    c = two_coin_pgc().circuit
    m = reflection(["z1", "z2"])
    assert expand(taylor_shift(taylor_shift(c, m), m)) == expand(c)


def test_non_binary_and_invalid_inputs():
    pgc = two_coin_pgc()
    with pytest.raises(CompileError):
        compile_pgc_to_smlpc(Pgc(pgc.circuit, pgc.variables, 3))
    b = CircuitBuilder(["z1"])
    bad = Pgc.binary(b.build(b.add([b.var("z1"), b.const(1)], [2, -1])))
    with pytest.raises(CompileError, match="not a distribution"):
        compile_pgc_to_smlpc(bad, check=True)


def _compiled_coefficients_match(pgc):
    table = check_distribution(pgc).table
    pc, part = compile_pgc_to_smlpc(pgc)
    validate(pc, require_division_free=True)
    got = expand(pc)
    want = {}
    for key, p in table.items():
        mono = "*".join(("x" if j else "xb") + str(i + 1) for i, j in enumerate(key))
        want[mono] = p
    return got == poly(want)


def test_random_small_pgcs_compile_exactly():
    for k in range(25):
        rng = stream(21, k)
        pgc = random_binary_pgc(rng, int(rng.integers(1, 5)))
        assert _compiled_coefficients_match(pgc)


def test_output_is_homogeneous_set_multilinear():
    for k in range(10):
        rng = stream(22, k)
        n = int(rng.integers(2, 5))
        pc, part = compile_pgc_to_smlpc(random_binary_pgc(rng, n))
        for m, _ in expand(pc).items():
            assert sum(e for _, e in m) == n
            assert all(e == 1 for _, e in m)
            assert sorted(int(v.lstrip("xb")) for v, _ in m) == list(range(1, n + 1))
        assert test_set_multilinear(pc, part, seed=k).accepted


# measured once on the corpus: size(out) / (s * n^2) stays below this
SIZE_CONSTANT = 40


def test_output_size_bound():
    for k in range(40):
        rng = stream(23, k)
        n = int(rng.integers(1, 9))
        pgc = random_binary_pgc(rng, n)
        pc, _ = compile_pgc_to_smlpc(pgc)
        assert pc.size <= SIZE_CONSTANT * pgc.circuit.size * max(n, 1) ** 2
