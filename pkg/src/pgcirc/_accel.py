"""Backend selection for the prime-field and permanent kernels.

The hot loops in :mod:`pgcirc.kernels` exist twice: as numba ``@njit``
functions and as plain numpy code. ``PGCIRC_BACKEND=numpy`` (or
``PGCIRC_DISABLE_NUMBA=1``) forces the numpy path; otherwise numba is used
when it imports cleanly.
"""

from __future__ import annotations

import os

_FORCE_NUMPY = (
    os.environ.get("PGCIRC_BACKEND", "").strip().lower() == "numpy"
    or os.environ.get("PGCIRC_DISABLE_NUMBA", "").strip() not in ("", "0")
)

try:
    if _FORCE_NUMPY:
        raise ImportError("numba disabled by environment")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    kwargs.setdefault("cache", True)
    if _njit is None:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    return _njit(*args, **kwargs)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
