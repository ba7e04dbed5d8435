"""Kernel backend selection.

Set AEROFL_BACKEND=numpy to force the pure-numpy kernels (e.g. when
numba is unavailable or for debugging); AEROFL_BACKEND=numba forces the
compiled path. The default tries numba and falls back to numpy.
"""

from __future__ import annotations

import os

from . import kernels_numpy

_BACKEND_ENV = "AEROFL_BACKEND"


def _resolve():
    choice = os.environ.get(_BACKEND_ENV, "auto").lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_BACKEND_ENV} must be auto|numba|numpy, got {choice!r}")
    if choice == "numpy":
        return "numpy", kernels_numpy
    try:
        from . import kernels_numba
        return "numba", kernels_numba
    except ImportError:
        if choice == "numba":
            raise
        return "numpy", kernels_numpy


_NAME, kernels = _resolve()


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return _NAME
