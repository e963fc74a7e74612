"""Hot numeric kernels: GF(2^61 - 1) circuit evaluation and the Ryser permanent.

Every kernel has a numba implementation (``*_nb``) and a pure-numpy one
(``*_np``). The public names dispatch on :func:`pgcirc._accel.backend`. Both
implementations are importable directly so tests and the benchmark can compare
them in one process.

Circuits reach these kernels as a flat program (see
:meth:`pgcirc.circuit.Circuit.fp_program`):

``kind``   int8   per node: 0 const, 1 var, 2 sum, 3 prod, 4 div
``arg``    int64  per node: column of the variable (var nodes), else -1
``cptr``   int64  CSR offsets into ``cidx``/``cw`` (length nodes + 1)
``cidx``   int64  child node indices
``cw``     uint64 edge weights mod p (1 for prod/div edges)
``cval``   uint64 constant values mod p (const nodes), else 0
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit

P61 = np.uint64((1 << 61) - 1)
_M32 = np.uint64(0xFFFFFFFF)
_M29 = np.uint64((1 << 29) - 1)
_S61 = np.uint64(61)
_S32 = np.uint64(32)
_S29 = np.uint64(29)
_S3 = np.uint64(3)

K_CONST, K_VAR, K_SUM, K_PROD, K_DIV = 0, 1, 2, 3, 4


# ---------------------------------------------------------------- scalar field ops


@njit(inline="always")
def _mulmod_nb(a, b):
    # operands < p; split into 32-bit limbs, fold 2^64 = 8 and 2^61 = 1 (mod p)
    a1 = a >> _S32
    a0 = a & _M32
    b1 = b >> _S32
    b0 = b & _M32
    hi = a1 * b1
    mid = a1 * b0 + a0 * b1
    lo = a0 * b0
    r = (hi << _S3) + (mid >> _S29) + ((mid & _M29) << _S32)
    r += (lo & P61) + (lo >> _S61)
    r = (r & P61) + (r >> _S61)
    r = (r & P61) + (r >> _S61)
    if r >= P61:
        r -= P61
    return r


@njit(inline="always")
def _addmod_nb(a, b):
    s = a + b
    if s >= P61:
        s -= P61
    return s


@njit
def _powmod_nb(a, e):
    result = np.uint64(1)
    base = a
    while e > 0:
        if e & 1:
            result = _mulmod_nb(result, base)
        base = _mulmod_nb(base, base)
        e >>= 1
    return result


def mulmod_np(a, b):
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1 = a >> _S32
    a0 = a & _M32
    b1 = b >> _S32
    b0 = b & _M32
    hi = a1 * b1
    mid = a1 * b0 + a0 * b1
    lo = a0 * b0
    r = (hi << _S3) + (mid >> _S29) + ((mid & _M29) << _S32)
    r = r + (lo & P61) + (lo >> _S61)
    r = (r & P61) + (r >> _S61)
    r = (r & P61) + (r >> _S61)
    return np.where(r >= P61, r - P61, r)


def addmod_np(a, b):
    s = np.asarray(a, dtype=np.uint64) + np.asarray(b, dtype=np.uint64)
    return np.where(s >= P61, s - P61, s)


def powmod_np(a, e: int):
    result = np.ones_like(np.asarray(a, dtype=np.uint64))
    base = np.asarray(a, dtype=np.uint64).copy()
    while e > 0:
        if e & 1:
            result = mulmod_np(result, base)
        base = mulmod_np(base, base)
        e >>= 1
    return result


# ---------------------------------------------------------- batched evaluation


@njit
def fp_eval_batch_nb(kind, arg, cptr, cidx, cw, cval, X, out):
    n = kind.shape[0]
    B = X.shape[1]
    vals = np.empty((n, B), dtype=np.uint64)
    bad = np.zeros(B, dtype=np.bool_)
    pm2 = (1 << 61) - 3
    for v in range(n):
        k = kind[v]
        if k == 0:
            for b in range(B):
                vals[v, b] = cval[v]
        elif k == 1:
            for b in range(B):
                vals[v, b] = X[arg[v], b]
        elif k == 2:
            for b in range(B):
                acc = np.uint64(0)
                for e in range(cptr[v], cptr[v + 1]):
                    acc = _addmod_nb(acc, _mulmod_nb(cw[e], vals[cidx[e], b]))
                vals[v, b] = acc
        elif k == 3:
            for b in range(B):
                acc = np.uint64(1)
                for e in range(cptr[v], cptr[v + 1]):
                    acc = _mulmod_nb(acc, vals[cidx[e], b])
                vals[v, b] = acc
        else:
            num = cidx[cptr[v]]
            den = cidx[cptr[v] + 1]
            for b in range(B):
                d = vals[den, b]
                if d == 0:
                    bad[b] = True
                    vals[v, b] = np.uint64(0)
                else:
                    vals[v, b] = _mulmod_nb(vals[num, b], _powmod_nb(d, pm2))
    return vals[out].copy(), bad


def fp_eval_batch_np(kind, arg, cptr, cidx, cw, cval, X, out):
    n = kind.shape[0]
    B = X.shape[1]
    vals = np.empty((n, B), dtype=np.uint64)
    bad = np.zeros(B, dtype=bool)
    for v in range(n):
        k = kind[v]
        lo, hi = cptr[v], cptr[v + 1]
        if k == K_CONST:
            vals[v] = cval[v]
        elif k == K_VAR:
            vals[v] = X[arg[v]]
        elif k == K_SUM:
            acc = np.zeros(B, dtype=np.uint64)
            for e in range(lo, hi):
                acc = addmod_np(acc, mulmod_np(cw[e], vals[cidx[e]]))
            vals[v] = acc
        elif k == K_PROD:
            acc = np.ones(B, dtype=np.uint64)
            for e in range(lo, hi):
                acc = mulmod_np(acc, vals[cidx[e]])
            vals[v] = acc
        else:
            d = vals[cidx[lo + 1]]
            zero = d == 0
            bad |= zero
            inv = powmod_np(np.where(zero, np.uint64(1), d), (1 << 61) - 3)
            vals[v] = np.where(zero, np.uint64(0), mulmod_np(vals[cidx[lo]], inv))
    return vals[out].copy(), bad


# ------------------------------------------- truncated bivariate evaluation


@njit
def fp_eval_bivariate_nb(kind, arg, cptr, cidx, cw, cval, point, ia, ib, D, out):
    n = kind.shape[0]
    W = D + 1
    vals = np.zeros((n, W, W), dtype=np.uint64)
    tmp = np.zeros((W, W), dtype=np.uint64)
    for v in range(n):
        k = kind[v]
        if k == 0:
            vals[v, 0, 0] = cval[v]
        elif k == 1:
            col = arg[v]
            if col == ia:
                if D >= 1:
                    vals[v, 1, 0] = np.uint64(1)
            elif col == ib:
                if D >= 1:
                    vals[v, 0, 1] = np.uint64(1)
            else:
                vals[v, 0, 0] = point[col]
        elif k == 2:
            for e in range(cptr[v], cptr[v + 1]):
                c = cidx[e]
                w = cw[e]
                for i in range(W):
                    for j in range(W - i):
                        x = vals[c, i, j]
                        if x != 0:
                            vals[v, i, j] = _addmod_nb(vals[v, i, j], _mulmod_nb(w, x))
        elif k == 3:
            first = cidx[cptr[v]]
            for i in range(W):
                for j in range(W - i):
                    vals[v, i, j] = vals[first, i, j]
            for e in range(cptr[v] + 1, cptr[v + 1]):
                c = cidx[e]
                for i in range(W):
                    for j in range(W - i):
                        tmp[i, j] = np.uint64(0)
                for i1 in range(W):
                    for j1 in range(W - i1):
                        f = vals[v, i1, j1]
                        if f == 0:
                            continue
                        for i2 in range(W - i1):
                            for j2 in range(W - i1 - j1 - i2):
                                g = vals[c, i2, j2]
                                if g != 0:
                                    tmp[i1 + i2, j1 + j2] = _addmod_nb(
                                        tmp[i1 + i2, j1 + j2], _mulmod_nb(f, g)
                                    )
                for i in range(W):
                    for j in range(W - i):
                        vals[v, i, j] = tmp[i, j]
        else:
            raise ValueError("division node in bivariate expansion")
    return vals[out].copy()


def _tri_mask(W: int) -> np.ndarray:
    i, j = np.indices((W, W))
    return i + j < W


def fp_eval_bivariate_np(kind, arg, cptr, cidx, cw, cval, point, ia, ib, D, out):
    n = kind.shape[0]
    W = D + 1
    mask = _tri_mask(W)
    vals = np.zeros((n, W, W), dtype=np.uint64)
    for v in range(n):
        k = kind[v]
        lo, hi = cptr[v], cptr[v + 1]
        if k == K_CONST:
            vals[v, 0, 0] = cval[v]
        elif k == K_VAR:
            col = arg[v]
            if col == ia:
                if D >= 1:
                    vals[v, 1, 0] = 1
            elif col == ib:
                if D >= 1:
                    vals[v, 0, 1] = 1
            else:
                vals[v, 0, 0] = point[col]
        elif k == K_SUM:
            acc = np.zeros((W, W), dtype=np.uint64)
            for e in range(lo, hi):
                acc = addmod_np(acc, mulmod_np(cw[e], vals[cidx[e]]))
            vals[v] = acc
        elif k == K_PROD:
            acc = vals[cidx[lo]].copy()
            for e in range(lo + 1, hi):
                g = vals[cidx[e]]
                res = np.zeros((W, W), dtype=np.uint64)
                for i1, j1 in zip(*np.nonzero(acc)):
                    block = mulmod_np(acc[i1, j1], g[: W - i1, : W - j1])
                    res[i1:, j1:] = addmod_np(res[i1:, j1:], block)
                acc = np.where(mask, res, np.uint64(0))
            vals[v] = acc
        else:
            raise ValueError("division node in bivariate expansion")
    return vals[out].copy()


# ------------------------------------------------------------------ permanent


@njit
def permanent_ryser_nb(A):
    n = A.shape[0]
    if n == 0:
        return 1
    rowsum = np.zeros(n, dtype=np.int64)
    total = 0
    prev = 0
    for k in range(1, 1 << n):
        gray = k ^ (k >> 1)
        diff = gray ^ prev
        j = 0
        while (diff >> j) & 1 == 0:
            j += 1
        if gray & diff:
            for r in range(n):
                rowsum[r] += A[r, j]
        else:
            for r in range(n):
                rowsum[r] -= A[r, j]
        prev = gray
        prod = 1
        for r in range(n):
            prod *= rowsum[r]
        bits = 0
        g = gray
        while g:
            bits += g & 1
            g >>= 1
        if bits & 1:
            total -= prod
        else:
            total += prod
    if n & 1:
        return -total
    return total


def permanent_ryser_np(A):
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if n == 0:
        return 1
    subsets = np.arange(1, 1 << n, dtype=np.int64)
    bits = (subsets[:, None] >> np.arange(n, dtype=np.int64)) & 1
    rowsums = bits @ A.T
    prods = np.prod(rowsums, axis=1)
    signs = np.where(bits.sum(axis=1) % 2 == 1, -1, 1)
    total = int(np.sum(signs * prods))
    return -total if n % 2 else total


if HAVE_NUMBA:
    fp_eval_batch = fp_eval_batch_nb
    fp_eval_bivariate = fp_eval_bivariate_nb
    permanent_ryser = permanent_ryser_nb
else:  # pragma: no cover - exercised with PGCIRC_BACKEND=numpy
    fp_eval_batch = fp_eval_batch_np
    fp_eval_bivariate = fp_eval_bivariate_np
    permanent_ryser = permanent_ryser_np
