"""Optional numba compilation for the slot-level kernels.

Set ``LYAPIDX_DISABLE_NUMBA=1`` to run every kernel as plain Python (slow,
but handy for debugging and for checking the compiled path against).
"""
import os

try:
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("LYAPIDX_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def maybe_njit(func):
    """Compile ``func`` with numba when enabled; keep ``py_func`` either way."""
    if USE_NUMBA:
        return _njit(cache=True, nogil=True)(func)
    func.py_func = func
    return func
