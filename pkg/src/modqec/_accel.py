"""Optional numba acceleration.

Set ``MODQEC_NO_NUMBA=1`` to run the pure numpy/Python code paths instead.
"""
from __future__ import annotations

import os

USE_NUMBA = os.environ.get("MODQEC_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def jit(func):
    """``numba.njit`` when enabled; otherwise the function is returned unchanged."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True)(func)
