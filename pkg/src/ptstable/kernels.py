"""Backend dispatch for the hot array kernels.

``numba`` runs compiled scalar loops, ``numpy`` runs the vectorized twins.
Both consume identical inputs (including the uniforms drawn by the
simulator), so their outputs agree to rounding.
"""
from __future__ import annotations

import contextlib
from types import SimpleNamespace

import numpy as np

from . import _kernels_nb, _kernels_np
from ._accel import NUMBA_OK, default_backend

numba_impl = SimpleNamespace(
    log_gamma_upper=_kernels_nb.log_gamma_upper_arr,
    log_gamma_lower=_kernels_nb.log_gamma_lower_arr,
    log_kernel_k=_kernels_nb.log_kernel_k_arr,
    draw_radii=_kernels_nb.draw_radii,
    segment_sum=_kernels_nb.segment_sum,
    ecf=_kernels_nb.ecf,
)
numpy_impl = SimpleNamespace(
    log_gamma_upper=_kernels_np.log_gamma_upper_arr,
    log_gamma_lower=_kernels_np.log_gamma_lower_arr,
    log_kernel_k=_kernels_np.log_kernel_k_arr,
    draw_radii=_kernels_np.draw_radii,
    segment_sum=_kernels_np.segment_sum,
    ecf=_kernels_np.ecf,
)

_state = {"name": default_backend()}


def backend() -> str:
    return _state["name"]


def set_backend(name: str) -> None:
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_OK:
        raise RuntimeError("numba is not installed")
    _state["name"] = name


@contextlib.contextmanager
def use_backend(name: str):
    old = backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)


def _impl():
    return numba_impl if _state["name"] == "numba" else numpy_impl


def log_gamma_upper(a: float, x) -> np.ndarray:
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    return _impl().log_gamma_upper(float(a), x)


def log_gamma_lower(a: float, x) -> np.ndarray:
    x = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)))
    return _impl().log_gamma_lower(float(a), x)


def log_kernel_k(t, alpha: float, p: float) -> np.ndarray:
    t = np.ascontiguousarray(np.atleast_1d(np.asarray(t, dtype=float)))
    return _impl().log_kernel_k(t, float(alpha), float(p))


def draw_radii(*args):
    return _impl().draw_radii(*args)


def segment_sum(counts, values):
    return _impl().segment_sum(np.ascontiguousarray(counts, dtype=np.int64),
                               np.ascontiguousarray(values, dtype=float))


def ecf(x, z):
    x = np.ascontiguousarray(np.asarray(x, dtype=float))
    z = np.ascontiguousarray(np.asarray(z, dtype=float))
    return _impl().ecf(x, z)
