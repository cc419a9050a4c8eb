"""Special functions: incomplete gamma with arbitrary real first parameter,
the tempering kernel k and its Mellin transform, and positive stable
densities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import _kernels_nb, kernels
from .errors import DomainError
from .quadrature import DEFAULT_TOL, QuadTol, quad


@dataclass(frozen=True)
class KernelParams:
    alpha: float
    p: float

    def __post_init__(self):
        if not self.alpha < 2:
            raise DomainError(f"alpha must be < 2, got {self.alpha}")
        if not self.p > 0:
            raise DomainError(f"p must be > 0, got {self.p}")


@dataclass(frozen=True)
class StableDensityOrder:
    """Index r of the positive stable law with Laplace transform exp(-t^r)."""

    r: float
    method: str = "auto"

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise DomainError(f"stable order must lie in (0, 1), got {self.r}")
        if self.method not in ("auto", "explicit-half", "zolotarev-numeric"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.method == "explicit-half" and self.r != 0.5:
            raise DomainError("explicit-half is only available for r = 1/2")

    @property
    def resolved_method(self) -> str:
        if self.method == "auto":
            return "explicit-half" if self.r == 0.5 else "zolotarev-numeric"
        return self.method


def gamma_upper(a: float, x):
    """Upper incomplete gamma Gamma(a, x) = int_x^inf t^(a-1) e^-t dt.

    ``a`` may be any real number (including zero and negative values);
    ``x`` must be positive.  Accepts scalar or array ``x``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("gamma_upper requires x > 0")
    if xa.ndim == 0:
        return math.exp(_kernels_nb.log_gamma_upper(float(a), float(xa)))
    return np.exp(kernels.log_gamma_upper(a, xa.ravel())).reshape(xa.shape)


def log_gamma_upper(a: float, x):
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("log_gamma_upper requires x > 0")
    if xa.ndim == 0:
        return _kernels_nb.log_gamma_upper(float(a), float(xa))
    return kernels.log_gamma_upper(a, xa.ravel()).reshape(xa.shape)


def kernel_k(s, kp: KernelParams):
    """k(s) = int_s^inf t^(-alpha-1) exp(-t^p) dt = Gamma(-alpha/p, s^p) / p.

    k(0) is +inf for alpha >= 0 and Gamma(-alpha/p)/p for alpha < 0.
    """
    sa = np.asarray(s, dtype=float)
    if np.any(sa < 0):
        raise DomainError("kernel_k requires s >= 0")
    if sa.ndim == 0:
        return math.exp(_kernels_nb.log_kernel_k(float(sa), kp.alpha, kp.p))
    return np.exp(kernels.log_kernel_k(sa.ravel(), kp.alpha, kp.p)).reshape(sa.shape)


def log_kernel_k(s, kp: KernelParams):
    sa = np.asarray(s, dtype=float)
    if sa.ndim == 0:
        return _kernels_nb.log_kernel_k(float(sa), kp.alpha, kp.p)
    return kernels.log_kernel_k(sa.ravel(), kp.alpha, kp.p).reshape(sa.shape)


def kernel_density(s, kp: KernelParams):
    """-k'(s) = s^(-alpha-1) exp(-s^p)."""
    s = np.asarray(s, dtype=float)
    return s ** (-kp.alpha - 1.0) * np.exp(-(s ** kp.p))


def kernel_mellin(z, kp: KernelParams) -> complex:
    """Mellin transform int_0^inf u^(z-1) k(1/u) du = -Gamma((-z-alpha)/p) / (p z).

    Defined for Re z < -max(alpha, 0).
    """
    z = complex(z)
    if not z.real < -max(kp.alpha, 0.0):
        raise DomainError(f"kernel_mellin needs Re z < {-max(kp.alpha, 0.0)}, got {z}")
    return complex(-special.gamma((-z - kp.alpha) / kp.p) / (kp.p * z))


# ---------------------------------------------------------------------------
# positive stable densities


def _half_stable(s):
    return math.exp(-1.0 / (4.0 * s)) * s ** -1.5 / (2.0 * math.sqrt(math.pi))


def _log_kanter(phi, r):
    """log of Kanter's function
    A(phi) = sin(r phi)^(r/(1-r)) sin((1-r) phi) / sin(phi)^(1/(1-r))."""
    return (r / (1 - r) * math.log(math.sin(r * phi))
            + math.log(math.sin((1 - r) * phi))
            - math.log(math.sin(phi)) / (1 - r))


def _stable_series(s, r):
    """Large-s expansion
    f_r(s) = (1/pi) sum_k (-1)^(k+1) Gamma(k r + 1) / k! sin(k pi r) s^(-k r - 1),
    convergent for every s > 0 and fast once s^-r is small."""
    ls = math.log(s)
    total = 0.0
    for k in range(1, 200):
        t = math.exp(math.lgamma(k * r + 1) - math.lgamma(k + 1) - (k * r + 1) * ls)
        total += (-1) ** (k + 1) * t * math.sin(k * math.pi * r)
        if t < 1e-17 * abs(total):
            break
    return total / math.pi


def _zolotarev(s, r, tol: QuadTol):
    if r * math.log(s) > math.log(20.0):
        return _stable_series(s, r)
    lc = -r / (1 - r) * math.log(s)

    def integrand(phi):
        if phi <= 0.0 or phi >= math.pi:
            return 0.0
        la = _log_kanter(phi, r)
        e = la - math.exp(la + lc)
        return math.exp(e) if e > -690.0 else 0.0  # clamp below ~1e-300

    # split where c A(phi) = 1, the peak of A e^{-cA}
    g = lambda phi: _log_kanter(phi, r) + lc
    lo, hi = 1e-12, math.pi - 1e-12
    pts = []
    if g(lo) < 0 < g(hi):
        pts.append(optimize.brentq(g, lo, hi, xtol=1e-14))
    val = quad(integrand, 0.0, math.pi, tol, points=pts)
    return r / (1 - r) * s ** (-1.0 / (1 - r)) * val / math.pi


def stable_density(s, order: StableDensityOrder, tol: QuadTol = DEFAULT_TOL):
    """Density f_r of the positive r-stable law with Laplace transform exp(-t^r).

    Exact for r = 1/2; otherwise Zolotarev's integral over (0, pi) in
    Kanter's form, evaluated by adaptive quadrature.
    """
    sa = np.asarray(s, dtype=float)
    if np.any(~(sa > 0)):
        raise DomainError("stable_density requires s > 0")
    if order.resolved_method == "explicit-half":
        fn = _half_stable
    else:
        fn = lambda x: _zolotarev(x, order.r, tol)
    if sa.ndim == 0:
        return fn(float(sa))
    return np.array([fn(float(x)) for x in sa.ravel()]).reshape(sa.shape)
