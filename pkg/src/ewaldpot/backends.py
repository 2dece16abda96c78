"""Kernel lane selection: compiled loops (numba) or vectorized numpy.

The active lane comes from EWALDPOT_BACKEND (see _jit) unless overridden
in-process with use_backend()/backend().  Both lanes implement the same
kernel signatures and agree to rounding, so switching is observationally
tolerance-safe but not bit-identical.
"""

from __future__ import annotations

import contextlib

from ._jit import HAS_NUMBA, default_backend
from . import kernels_numba, kernels_numpy

_KERNELS = {"numba": kernels_numba, "numpy": kernels_numpy}

_override = None


def active_backend() -> str:
    """Name of the lane that get_kernels() will hand out."""
    return _override if _override is not None else default_backend()


def use_backend(name):
    """Force a lane for this process ('numba' or 'numpy'); None restores the default."""
    global _override
    if name is None:
        _override = None
        return
    if name not in _KERNELS:
        raise ValueError(f"unknown backend {name!r}; expected 'numba' or 'numpy'")
    if name == "numba" and not HAS_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _override = name


@contextlib.contextmanager
def backend(name):
    """Temporarily force a lane (context manager)."""
    global _override
    previous = _override
    use_backend(name)
    try:
        yield
    finally:
        _override = previous


def get_kernels():
    """The kernel module of the active lane."""
    return _KERNELS[active_backend()]
