from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from pgcirc.corpus import random_abp, random_formula, random_point
from pgcirc.dpp import (
    Abp,
    AffineForm,
    FAdd,
    FConst,
    FMul,
    FormulaSyntaxError,
    FVar,
    abp_to_dpp,
    add_gadgets,
    base_gadget,
    cycle_cover_sum,
    cycle_covers,
    exact_determinant,
    format_formula,
    formula_counts,
    formula_eval,
    formula_poly,
    formula_to_dpp,
    formula_to_gadget,
    imm_abp,
    imm_matrix_product,
    mul_gadgets,
    parse_formula,
    psd_shift,
    strictly_diagonally_dominant,
    symbolic_determinant,
    verify_gadget,
)
from pgcirc.field import stream
from pgcirc.poly import SparsePolynomial

F = Fraction
X = SparsePolynomial.var


def closed_poly(g):
    return g.to_dpp(closed=True).polynomial()


def base_matrix(v):
    return [
        [0, 1, 0, 0, 0],
        [0, 0, 1, 0, 1],
        [0, 0, v, 1, 0],
        [0, 1, 0, 1, 0],
        [1, 0, 0, 0, 0],
    ]


# ------------------------------------------------------------------ determinants


def test_exact_determinant_examples():
    assert exact_determinant([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 1
    assert exact_determinant(base_matrix(7)) == 7
    assert exact_determinant([[1, 2, 3], [1, 2, 3], [4, 5, 6]]) == 0
    assert exact_determinant([[F(1, 2), F(1, 3)], [F(1, 5), F(1, 7)]]) == F(1, 14) - F(1, 15)
    assert exact_determinant([]) == 1


def test_exact_determinant_against_permutation_sum():
    rng = stream(61, 0)
    for n in range(1, 6):
        A = [[F(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(n)] for _ in range(n)]
        ref = F(0)
        for p in itertools.permutations(range(n)):
            inv = sum(p[i] > p[j] for i in range(n) for j in range(i + 1, n))
            term = F((-1) ** inv)
            for i in range(n):
                term *= A[i][p[i]]
            ref += term
        assert exact_determinant(A) == ref


def test_symbolic_determinant_of_base_matrix():
    M = [[SparsePolynomial.const(x) if not isinstance(x, str) else X(x) for x in row] for row in base_matrix("v")]
    assert symbolic_determinant(M) == X("v")


def test_cycle_cover_sign_convention():
    for v in (F(3), F(-2, 5)):
        M = base_matrix(v)
        assert cycle_cover_sum(M) == exact_determinant(M)
    covers = list(cycle_covers(base_matrix(1)))
    assert covers and all(sign == 1 for _, sign in covers)


# ------------------------------------------------------------------ gadgets


def test_base_gadget_is_base_matrix():
    rep = base_gadget("v").to_dpp()
    assert rep.symbolic_matrix() == [
        [SparsePolynomial.const(x) if not isinstance(x, str) else X(x) for x in row] for row in base_matrix("v")
    ]
    assert rep.polynomial() == X("v")
    assert closed_poly(base_gadget(0)) == SparsePolynomial()
    report = verify_gadget(base_gadget("v"), FVar("v"))
    assert report.ok and report.conditions == (SparsePolynomial.const(1), SparsePolynomial(), SparsePolynomial())


def test_add_gadgets():
    g = add_gadgets(base_gadget("v"), base_gadget("w"))
    assert g.n == 8
    assert closed_poly(g) == X("v") + X("w")
    assert closed_poly(add_gadgets(base_gadget("v"), base_gadget(0))) == X("v")
    assert formula_to_dpp(FAdd(FConst(F(2)), FConst(F(3)))).determinant_at({}) == 5
    assert verify_gadget(g, FAdd(FVar("v"), FVar("w"))).ok


def test_mul_gadgets():
    g = mul_gadgets(base_gadget("v"), base_gadget("w"))
    assert g.n == 11
    assert closed_poly(g) == X("v").mul(X("w"))
    assert closed_poly(mul_gadgets(base_gadget("v"), base_gadget(1))) == X("v")
    assert formula_to_dpp(FMul(FConst(F(2)), FConst(F(3)))).determinant_at({}) == 6
    assert verify_gadget(g, FMul(FVar("v"), FVar("w"))).ok


def test_planted_violation_fails_condition():
    g = base_gadget("v")
    bad = g.with_edge(g.t, g.t, 1)
    report = verify_gadget(bad)
    assert not report.ok and "det(G - s)" in report.offending


def test_formula_examples():
    assert formula_to_dpp(FVar("x")).n == 5
    f = parse_formula("((x+y)*z)")
    assert formula_to_dpp(f).determinant_at({"x": 2, "y": 3, "z": 4}) == 20
    assert formula_to_dpp(FConst(F(1))).determinant_at({}) == 1


def test_size_recurrences_and_conditions_on_corpus():
    for k in range(40):
        rng = stream(62, k)
        f = random_formula(rng)
        g = formula_to_gadget(f)
        c = formula_counts(f)
        assert g.n == 5 * c["leaves"] + c["mul"] - 2 * c["add"]
        if isinstance(f, (FAdd, FMul)):
            g1, g2 = formula_to_gadget(f.left), formula_to_gadget(f.right)
            assert g.n == g1.n + g2.n + (1 if isinstance(f, FMul) else -2)
        assert verify_gadget(g, f, points=2, seed=k).ok


def test_formula_determinant_at_random_points():
    for k in range(30):
        rng = stream(63, k)
        f = random_formula(rng)
        rep = formula_to_dpp(f)
        assert rep.diagonal_confined()
        names = sorted({"x", "y", "z", "w"})
        for _ in range(5):
            p = random_point(rng, names)
            assert rep.determinant_at(p) == formula_eval(f, p)


def test_small_formula_polynomial_is_exact():
    f = parse_formula("((x*y)+(3/2*(x+z)))")
    assert formula_to_dpp(f).polynomial() == formula_poly(f)


def test_formula_parser():
    f = parse_formula("x + 2*y*z + -1/3")
    assert format_formula(parse_formula(format_formula(f))) == format_formula(f)
    assert formula_eval(f, {"x": 1, "y": 2, "z": 3}) == 1 + 12 - F(1, 3)
    for bad in ("(x+", "x y", "", "x+*y"):
        with pytest.raises(FormulaSyntaxError):
            parse_formula(bad)


# ------------------------------------------------------------------ ABPs


def test_imm_examples():
    rep = abp_to_dpp(imm_abp(2, 3))
    names = rep.source_variables()
    assert rep.determinant_at({v: 1 for v in names}) == 4
    rep22 = abp_to_dpp(imm_abp(2, 2))
    poly = rep22.polynomial()
    assert poly == imm_matrix_product(2, 2)
    assert poly == X("x1_1_1").mul(X("x2_1_1")) + X("x1_1_2").mul(X("x2_2_1"))


def test_single_edge_abp():
    abp = Abp((("s",), ("t",)), (("s", "t", "x"),))
    rep = abp_to_dpp(abp)
    assert rep.n == 5 and rep.polynomial() == X("x")
    M = rep.symbolic_matrix()
    covers = list(cycle_covers([[M[i][j].evaluate({"x": 1}) for j in range(5)] for i in range(5)]))
    assert all(sign == 1 for _, sign in covers)


def test_abp_rejects_non_layered_edges():
    with pytest.raises(ValueError):
        Abp((("s",), ("a",), ("t",)), (("s", "t", "x"),))


def test_random_abps_and_positive_signs():
    for k in range(15):
        rng = stream(64, k)
        abp = random_abp(rng, width=3, depth=int(rng.integers(1, 5)))
        rep = abp_to_dpp(abp)
        assert rep.diagonal_confined()
        for _ in range(5):
            p = random_point(rng, ["x", "y", "z"])
            assert rep.determinant_at(p) == abp.evaluate(p)
    tiny = Abp((("s",), ("a", "b"), ("t",)), (("s", "a", "x"), ("s", "b", "y"), ("a", "t", 1), ("b", "t", 1)))
    rep = abp_to_dpp(tiny)
    poly = rep.polynomial()
    assert poly == tiny.polynomial() and all(c > 0 for _, c in poly.items())


# ------------------------------------------------------------------ PSD shift


def test_psd_shift_on_base_matrix():
    rep = base_gadget("v").to_dpp()
    shifted = psd_shift(rep, 3)
    assert [shifted.kernel[i][i] for i in range(5)] == [3, 3, 3, 4, 3]
    assert shifted.projection[2] == AffineForm.of(-3, {"v": 1})
    assert strictly_diagonally_dominant(shifted.kernel)
    assert max(sum(abs(x) for j, x in enumerate(r) if j != i) for i, r in enumerate(shifted.kernel)) <= 2
    rng = stream(65, 0)
    for _ in range(10):
        p = random_point(rng, ["v"])
        assert shifted.determinant_at(p) == rep.determinant_at(p)
    with pytest.raises(ValueError, match="shift too small"):
        psd_shift(rep, 0)


def test_psd_shift_on_formulas():
    for k in range(10):
        rng = stream(66, k)
        f = random_formula(rng)
        rep = formula_to_dpp(f)
        need = max(sum(abs(x) for j, x in enumerate(r) if j != i) - r[i] for i, r in enumerate(rep.kernel))
        shifted = psd_shift(rep, need + 1)
        assert strictly_diagonally_dominant(shifted.kernel) and shifted.diagonal_confined()
        p = random_point(rng, ["x", "y", "z", "w"])
        assert shifted.determinant_at(p) == formula_eval(f, p)


def test_sparse_and_dense_elimination_agree():
    from pgcirc.dpp import _bareiss_determinant, _sparse_determinant

    rng = stream(67, 0)
    for n in range(1, 12):
        for _ in range(5):
            A = [[F(0)] * n for _ in range(n)]
            for _ in range(2 * n):
                A[int(rng.integers(0, n))][int(rng.integers(0, n))] = F(int(rng.integers(-4, 5)), int(rng.integers(1, 4)))
            assert _sparse_determinant(A) == _bareiss_determinant(A)
    g = formula_to_gadget(random_formula(stream(67, 1)))
    M = g.to_dpp().matrix_at({v: 3 for v in "xyzw"})
    assert _sparse_determinant(M) == _bareiss_determinant(M)
