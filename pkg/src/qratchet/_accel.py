"""Kernel backend selection.

The hot loops in :mod:`qratchet.kernels` exist twice: a numba-compiled
scalar loop and a vectorised numpy path. ``QRATCHET_KERNELS`` picks one:

* ``numba`` (default) -- use the compiled loop when numba imports cleanly;
* ``numpy`` -- always use the numpy path.

``NUMBA_DISABLE_JIT=1`` is honoured too: numba then runs the loop as plain
Python, which is correct but slow, so we fall back to numpy instead.
"""

import os
from typing import Any, Callable

try:
    from numba import njit as _numba_njit
except ImportError:  # pragma: no cover - numba is optional
    _numba_njit = None

BACKENDS = ("numba", "numpy")


def _requested() -> str:
    value = os.environ.get("QRATCHET_KERNELS", "numba").strip().lower()
    if value not in BACKENDS:
        raise ValueError(f"QRATCHET_KERNELS must be one of {BACKENDS}, got {value!r}")
    return value


def numba_available() -> bool:
    return _numba_njit is not None and os.environ.get("NUMBA_DISABLE_JIT", "0") in ("", "0")


def default_backend() -> str:
    if _requested() == "numba" and numba_available():
        return "numba"
    return "numpy"


def njit(**opts: Any) -> Callable[[Callable], Callable]:
    """``numba.njit`` when available, identity otherwise."""
    if _numba_njit is None:
        return lambda f: f
    return _numba_njit(**opts)
