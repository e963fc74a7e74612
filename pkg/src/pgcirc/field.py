"""The test field GF(p), p = 2**61 - 1, and the map from rationals into it."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

P = (1 << 61) - 1


class FieldError(ArithmeticError):
    """A rational cannot be mapped into GF(p) (its denominator is divisible by p)."""


def to_fp(value: Fraction | int) -> int:
    value = Fraction(value)
    den = value.denominator % P
    if den == 0:
        raise FieldError(f"denominator of {value} vanishes mod p")
    return value.numerator % P * pow(den, -1, P) % P


def fp_inv(a: int) -> int:
    a %= P
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in GF(p)")
    return pow(a, -1, P)


def uniform_points(rng: np.random.Generator, shape) -> np.ndarray:
    """Uniform elements of GF(p) as a uint64 array."""
    return rng.integers(0, P, size=shape, dtype=np.uint64)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Deterministic child generator for ``(seed, *keys)``.

    Every randomized verdict in the package draws from a stream keyed this way,
    so a result can be reproduced from the seed and the trial/triple index alone.
    """
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
