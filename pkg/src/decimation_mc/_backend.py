"""Kernel backend selection.

``DECIMATION_MC_BACKEND=numpy`` forces the pure-numpy kernels; the default
is ``numba`` whenever numba imports. Both implementations stay importable so
they can be benchmarked against each other.
"""
from __future__ import annotations

import os

ENV_VAR = "DECIMATION_MC_BACKEND"
BACKENDS = ("numba", "numpy")

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    NUMBA_AVAILABLE = False


def njit(*args, **kwargs):
    """``numba.njit(cache=True, nogil=True)`` or the identity without numba."""
    opts = {"cache": True, "nogil": True}
    opts.update(kwargs)

    def wrap(fn):
        if not NUMBA_AVAILABLE:
            return fn
        return numba.njit(**opts)(fn)

    if args and callable(args[0]):
        return wrap(args[0])
    return wrap


def selected_backend() -> str:
    name = os.environ.get(ENV_VAR, "numba" if NUMBA_AVAILABLE else "numpy").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"{ENV_VAR} must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError(f"{ENV_VAR}=numba but numba is not installed")
    return name
