"""Backend selection for the hot kernels.

``UCMVDR_BACKEND=numpy`` forces the vectorised numpy path. Any other value
(or unset) uses numba when it imports, and falls back to numpy otherwise.
"""
import os

_requested = os.environ.get("UCMVDR_BACKEND", "numba").strip().lower()

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is an optional extra
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _requested != "numpy"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    if _numba is None:
        return func
    return _numba.njit(cache=True)(func)
