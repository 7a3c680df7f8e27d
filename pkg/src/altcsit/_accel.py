"""Numba switch.

Set ``ALTCSIT_DISABLE_NUMBA=1`` before import to force the pure-numpy paths.
``njit`` still compiles when numba is importable so both paths stay testable
side by side; ``NUMBA_ENABLED`` decides which one the public API dispatches to.
Compiled kernels go to numba's on-disk cache; ``ALTCSIT_NUMBA_CACHE=0`` turns it
off. The cache does not notice when a compiled callee changes, so clear
``__pycache__`` after editing the kernels.
"""
import os

_FLAG = os.environ.get("ALTCSIT_DISABLE_NUMBA", "").strip().lower()
_TRUE = {"1", "true", "yes", "on"}
DISABLED_BY_ENV = _FLAG in _TRUE
CACHE = os.environ.get("ALTCSIT_NUMBA_CACHE", "1").strip().lower() in _TRUE

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

NUMBA_AVAILABLE = numba is not None
NUMBA_ENABLED = NUMBA_AVAILABLE and not DISABLED_BY_ENV


def njit(func):
    """Compile ``func`` with numba when importable, otherwise return it unchanged."""
    if numba is None:
        return func
    return numba.njit(cache=CACHE)(func)


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
