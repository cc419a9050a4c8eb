"""Optional numba acceleration.

The hot kernels in :mod:`ptstable.kernels` exist twice: once as scalar loops
compiled with ``numba.njit`` and once as vectorized numpy code.  The
environment variable ``PTSTABLE_BACKEND`` (``numba`` or ``numpy``) picks the
default at import time; :func:`ptstable.kernels.set_backend` switches at run
time.  When numba is missing the numpy path is used and ``njit`` degrades to
the identity decorator so the scalar helpers still run as plain Python.
"""
from __future__ import annotations

import os

try:
    import numba

    NUMBA_OK = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    NUMBA_OK = False


def njit(*args, **kwargs):
    if NUMBA_OK:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def deco(f):
        return f

    return deco


def default_backend() -> str:
    requested = os.environ.get("PTSTABLE_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"PTSTABLE_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not NUMBA_OK:
        return "numpy"
    return requested


def num_threads() -> int:
    """Worker cap from ``TS_NUM_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("TS_NUM_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"TS_NUM_THREADS must be an integer, got {raw!r}") from None
    return max(1, os.cpu_count() or 1)
