"""Numba detection and the backend environment flag.

The env var EWALDPOT_BACKEND selects the kernel lane:

    EWALDPOT_BACKEND=numba   compiled kernels (default when numba imports)
    EWALDPOT_BACKEND=numpy   vectorized numpy/scipy kernels

When numba is missing the compiled lane silently degrades to plain Python
(same code, undecorated), and the default lane becomes numpy.
"""
import os

_ENV_VAR = "EWALDPOT_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # signature-compatible no-op decorator
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def default_backend() -> str:
    """Return the lane selected by the environment, validated."""
    name = os.environ.get(_ENV_VAR, "").strip().lower()
    if name == "":
        return "numba" if HAS_NUMBA else "numpy"
    if name not in ("numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy', got {name!r}"
        )
    if name == "numba" and not HAS_NUMBA:
        raise ValueError(f"{_ENV_VAR}=numba requested but numba is not importable")
    return name
