"""Compare the numba and numpy implementations of the GF(p) and permanent kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Both implementations are imported from the same module regardless of the
backend flag, so one process times both. Outputs are checked for equality
before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pgcirc import kernels
from pgcirc._accel import HAVE_NUMBA
from pgcirc.corpus import random_sml_circuit
from pgcirc.field import stream, uniform_points


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up, includes JIT compilation on the first call
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    c, part = random_sml_circuit(stream(0, 0), 10, 3, 3)
    prog = c.fp_program
    X = uniform_points(stream(0, 1), (len(c.variables), 2048))
    point = uniform_points(stream(0, 2), len(c.variables))
    col = {v: i for i, v in enumerate(c.variables)}
    a, b = part.parts[0][:2]
    D = 10
    A = (stream(0, 3).random((12, 12)) < 0.4).astype(np.int64)

    yield (
        f"batch eval ({len(c)} nodes x 2048 points)",
        lambda: kernels.fp_eval_batch_np(*prog.args(), X, prog.out),
        lambda: kernels.fp_eval_batch_nb(*prog.args(), X, prog.out),
        lambda x, y: np.array_equal(x[0], y[0]),
    )
    yield (
        f"bivariate expansion (degree {D})",
        lambda: kernels.fp_eval_bivariate_np(*prog.args(), point, col[a], col[b], D, prog.out),
        lambda: kernels.fp_eval_bivariate_nb(*prog.args(), point, col[a], col[b], D, prog.out),
        np.array_equal,
    )
    yield (
        "Ryser permanent (12 x 12)",
        lambda: kernels.permanent_ryser_np(A),
        lambda: kernels.permanent_ryser_nb(A),
        lambda x, y: x == y,
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        print("numba backend not active (PGCIRC_BACKEND=numpy or numba missing); timing numpy only")
    print(f"{'kernel':42s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for name, np_fn, nb_fn, same in cases():
        t_np = best_of(np_fn, args.repeat)
        if HAVE_NUMBA:
            assert same(np_fn(), nb_fn()), name
            t_nb = best_of(nb_fn, args.repeat)
            print(f"{name:42s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:7.1f}x")
        else:
            print(f"{name:42s} {t_np * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
