from __future__ import annotations

import itertools
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgcirc import kernels
from pgcirc._accel import HAVE_NUMBA
from pgcirc.circuit import CircuitBuilder, evaluate
from pgcirc.corpus import random_sml_circuit
from pgcirc.field import P, fp_inv, stream, to_fp, uniform_points

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba backend not active")

u64 = st.integers(min_value=0, max_value=P - 1)


@given(u64, u64)
def test_mulmod_matches_python(a, b):
    got = kernels.mulmod_np(np.array([a], dtype=np.uint64), np.array([b], dtype=np.uint64))[0]
    assert int(got) == a * b % P
    if HAVE_NUMBA:
        assert int(kernels._mulmod_nb(np.uint64(a), np.uint64(b))) == a * b % P


@given(u64, u64)
def test_addmod_matches_python(a, b):
    got = kernels.addmod_np(np.array([a], dtype=np.uint64), np.array([b], dtype=np.uint64))[0]
    assert int(got) == (a + b) % P


@given(u64, st.integers(min_value=0, max_value=P - 2))
def test_powmod_matches_python(a, e):
    got = kernels.powmod_np(np.array([a], dtype=np.uint64), e)[0]
    assert int(got) == pow(a, e, P)


def test_field_inverse_and_rationals():
    assert to_fp(Fraction(1, 2)) * 2 % P == 1
    assert fp_inv(3) * 3 % P == 1
    assert to_fp(Fraction(-1)) == P - 1


def _div_circuit():
    b = CircuitBuilder(["x", "y"])
    x, y = b.var("x"), b.var("y")
    num = b.add([b.mul([x, x, y]), b.const(Fraction(3, 7))], [Fraction(-2, 3), 1])
    den = b.add([x, y], [1, -1])
    return b.build(b.div(num, den))


def _python_eval(c, cols, X):
    out = []
    for t in range(X.shape[1]):
        point = {v: int(X[i, t]) for i, v in enumerate(cols)}
        try:
            out.append(evaluate(c, point, field=P))
        except ArithmeticError:
            out.append(None)
    return out


@pytest.mark.parametrize("impl", ["np", pytest.param("nb", marks=needs_numba)])
def test_batch_eval_agrees_with_python_on_div_circuit(impl):
    c = _div_circuit()
    X = uniform_points(stream(1, 2), (2, 50))
    X[:, 0] = [5, 5]  # zero denominator
    fn = getattr(kernels, f"fp_eval_batch_{impl}")
    vals, bad = fn(*c.fp_program.args(), X, c.fp_program.out)
    ref = _python_eval(c, c.variables, X)
    for t, r in enumerate(ref):
        if r is None:
            assert bad[t]
        else:
            assert not bad[t] and int(vals[t]) == r
    assert bad[0]


@needs_numba
def test_numba_and_numpy_batch_agree_on_random_circuits():
    for k in range(10):
        c, _ = random_sml_circuit(stream(3, k), 5, 3, 2)
        X = uniform_points(stream(4, k), (len(c.variables), 64))
        a, _ = kernels.fp_eval_batch_nb(*c.fp_program.args(), X, c.fp_program.out)
        b, _ = kernels.fp_eval_batch_np(*c.fp_program.args(), X, c.fp_program.out)
        assert np.array_equal(a, b)


def _bivariate_ref(c, point, a, b, D):
    """Coefficients by Lagrange-free brute force: evaluate on a grid and solve over GF(p)."""
    cols = list(c.variables)
    W = D + 1
    coeffs = np.zeros((W, W), dtype=object)
    # polynomial in (s, t) of total degree <= D: sample s, t in 0..D and invert Vandermonde rows
    pts = list(range(W))
    vals = {}
    for s, t in itertools.product(pts, pts):
        p = {v: int(point[i]) for i, v in enumerate(cols)}
        p[a] = s
        if b is not None:
            p[b] = t
        vals[s, t] = evaluate(c, p, field=P)
    V = [[pow(s, i, P) for i in range(W)] for s in pts]
    Vinv = _inverse_mod(V)
    # coefficients c[i, j]: vals = V C V^T
    M = [[vals[s, t] for t in pts] for s in pts]
    C = _matmul(_matmul(Vinv, M), _transpose(Vinv))
    for i in range(W):
        for j in range(W):
            coeffs[i, j] = C[i][j] % P
    return coeffs


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) % P for j in range(len(B[0]))] for i in range(len(A))]


def _transpose(A):
    return [list(r) for r in zip(*A)]


def _inverse_mod(A):
    n = len(A)
    M = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c] % P)
        M[c], M[piv] = M[piv], M[c]
        inv = pow(M[c][c], P - 2, P)
        M[c] = [x * inv % P for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [(x - f * y) % P for x, y in zip(M[r], M[c])]
    return [r[n:] for r in M]


@pytest.mark.parametrize("impl", ["np", pytest.param("nb", marks=needs_numba)])
def test_bivariate_expansion_matches_interpolation(impl):
    c, part = random_sml_circuit(stream(9, 0), 3, 2, 2)
    point = uniform_points(stream(9, 1), len(c.variables))
    a, b = part.parts[1]
    cols = {v: i for i, v in enumerate(c.variables)}
    D = 3
    fn = getattr(kernels, f"fp_eval_bivariate_{impl}")
    got = fn(*c.fp_program.args(), point, cols[a], cols[b], D, c.fp_program.out)
    ref = _bivariate_ref(c, point, a, b, D)
    for i in range(D + 1):
        for j in range(D + 1 - i):
            assert int(got[i, j]) == ref[i, j]


def test_bivariate_rejects_division():
    c = _div_circuit()
    with pytest.raises(ValueError):
        kernels.fp_eval_bivariate_np(*c.fp_program.args(), np.zeros(2, dtype=np.uint64), 0, 1, 2, c.fp_program.out)


def _perm_brute(A):
    n = len(A)
    return sum(int(np.prod([A[i][p[i]] for i in range(n)])) for p in itertools.permutations(range(n)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_ryser_matches_permutation_sum(rows):
    A = np.array(rows, dtype=np.int64)
    ref = _perm_brute(rows)
    assert kernels.permanent_ryser_np(A) == ref
    if HAVE_NUMBA:
        assert kernels.permanent_ryser_nb(A) == ref


def test_ryser_all_ones_is_factorial():
    assert kernels.permanent_ryser(np.ones((5, 5), dtype=np.int64)) == 120


def test_numpy_backend_selected_by_environment():
    code = (
        "from pgcirc._accel import backend; from pgcirc import kernels;"
        "import numpy as np;"
        "assert backend() == 'numpy';"
        "assert kernels.fp_eval_batch is kernels.fp_eval_batch_np;"
        "print(kernels.permanent_ryser(np.ones((4, 4), dtype=np.int64)))"
    )
    env = dict(os.environ, PGCIRC_BACKEND="numpy")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "24"
