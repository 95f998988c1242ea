"""Numba toggle.

Set ``HYBRIDLF_PURE_NUMPY=1`` to run every kernel through its vectorized
numpy implementation instead of the compiled loop.
"""

import os

PURE_NUMPY = os.environ.get("HYBRIDLF_PURE_NUMPY", "0").lower() in ("1", "true", "yes")

try:
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not PURE_NUMPY


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise."""
    if HAS_NUMBA:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
