"""The Levy measure M generated by (alpha, p, R): tails, radial densities,
small-ball mass, scaled-tail limits and the selfdecomposability predicate.

Along a ray with profile P the tail is

    M(|x| > r on the ray) = int k(r / rho) P(drho),
    k(s) = int_s^inf t^(-alpha-1) exp(-t^p) dt,

evaluated exactly for atoms and grids and by quadrature for Pareto profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special

from . import _kernels_nb, kernels
from .errors import DomainError, InvalidMeasureError
from .measure import (Pareto, TSParams, _profile_laplace, alpha_moment, to_spectral,
                      validate)
from .quadrature import DEFAULT_TOL, QuadTol, quad_log


def _check(params: TSParams):
    rep = validate(params.alpha, params.R)
    if not rep.valid:
        raise InvalidMeasureError("R does not generate a Levy measure", rep.violations)


def _rays(params: TSParams, cone: Optional[Sequence[int]]):
    if cone is None:
        return params.R.rays
    n = len(params.R.rays)
    for i in cone:
        if not 0 <= i < n:
            raise DomainError(f"ray index {i} out of range for {n} rays")
    return [params.R.rays[i] for i in cone]


def _log_k_of_log(ls: float, alpha: float, p: float) -> float:
    """log k(e^ls), usable far outside the float range of e^ls."""
    if ls < -700.0:
        return _kernels_nb.log_kernel_k_small(ls, alpha, p)
    if ls > 700.0:
        return -math.inf
    return _kernels_nb.log_kernel_k(math.exp(ls), alpha, p)


# ---------------------------------------------------------------------------
# per-ray tails and densities


def pareto_tail_quad(alpha: float, p: float, prof: Pareto, r: float,
                     tol: QuadTol = DEFAULT_TOL) -> float:
    """int k(r / rho) c rho' rho^(-rho'-1) drho over (r0, inf) by quadrature,
    with breakpoints at r0 and at rho = r."""
    lr = math.log(r)
    return prof.integrate_log(lambda v: _log_k_of_log(lr - v, alpha, p), tol, points=(r,))


def pareto_tail_closed(alpha: float, p: float, prof: Pareto, r):
    """Closed form of the Pareto-profile tail:
    c r0^-rho k(r/r0) + c r^-rho gamma((rho - alpha)/p, (r/r0)^p) / p."""
    r = np.asarray(r, dtype=float)
    out = np.array([math.exp(_kernels_nb.log_pareto_tail(
        math.log(x), alpha, p, prof.r0, prof.rho, prof.c)[0]) for x in r.ravel()])
    return out.reshape(r.shape) if r.ndim else float(out[0])


def ray_tail(alpha: float, p: float, prof, r, tol: QuadTol = DEFAULT_TOL, exact_pareto=False):
    """Tail of M along one ray at radius (or radii) r."""
    ra = np.asarray(r, dtype=float)
    flat = np.atleast_1d(ra).ravel()
    if isinstance(prof, Pareto):
        if exact_pareto:
            vals = np.atleast_1d(pareto_tail_closed(alpha, p, prof, flat))
        else:
            vals = np.array([pareto_tail_quad(alpha, p, prof, float(x), tol) for x in flat])
    else:
        nodes, w = prof.nodes()
        s = flat[:, None] / nodes[None, :]
        lk = kernels.log_kernel_k(s.ravel(), alpha, p).reshape(s.shape)
        vals = np.exp(lk) @ w
    return vals.reshape(ra.shape) if ra.ndim else float(vals[0])


def ray_density(alpha: float, p: float, prof, r):
    """Radial density m(r) of M along one ray (with respect to dr)."""
    r = np.asarray(r, dtype=float)
    if isinstance(prof, Pareto):
        # (rho c / p) r^(-rho-1) gamma((rho - alpha)/p, (r/r0)^p), in logs
        ap = (prof.rho - alpha) / p
        lr = np.log(np.atleast_1d(r))
        if prof.r0 == 0:
            lg = np.full(lr.shape, special.gammaln(ap))
        else:
            lx = p * (lr - math.log(prof.r0))
            lg = np.empty(lr.shape)
            tiny = lx < -600.0
            lg[tiny] = ap * lx[tiny] - math.log(ap)
            lg[~tiny] = kernels.log_gamma_lower(ap, np.exp(lx[~tiny]))
        out = np.exp(math.log(prof.rho * prof.c / p) - (prof.rho + 1.0) * lr + lg)
        return out.reshape(r.shape) if r.ndim else float(out[0])
    nodes, w = prof.nodes()
    rr = np.atleast_1d(r)[..., None] / nodes
    dens = (w / nodes) * rr ** (-1.0 - alpha) * np.exp(-(rr ** p))
    out = dens.sum(axis=-1)
    return out.reshape(r.shape) if r.ndim else float(out[0])


def log_ray_density(alpha: float, p: float, prof, v: float) -> float:
    """log of the radial density of M along a ray at r = e^v."""
    if isinstance(prof, Pareto):
        ap = (prof.rho - alpha) / p
        if prof.r0 == 0:
            lg = math.lgamma(ap)
        else:
            lx = p * (v - math.log(prof.r0))
            if lx < -600:
                lg = ap * lx - math.log(ap)
            elif lx > 600:
                lg = math.lgamma(ap)
            else:
                lg = _kernels_nb.log_gamma_lower(ap, math.exp(lx))
        return math.log(prof.rho * prof.c / p) - (prof.rho + 1.0) * v + lg
    nodes, w = prof.nodes()
    sel = w > 0
    ln = np.log(nodes[sel])
    d = v - ln
    with np.errstate(over="ignore"):
        terms = np.log(w[sel]) - ln - (1.0 + alpha) * d - np.exp(p * d)
    top = terms.max()
    if not math.isfinite(top):
        return -math.inf
    return float(top + math.log(np.exp(terms - top).sum()))


# ---------------------------------------------------------------------------
# public functionals


def tail(params: TSParams, r, cone: Optional[Sequence[int]] = None,
         tol: QuadTol = DEFAULT_TOL):
    """M_D(r) = M(|x| > r, x/|x| in D), D given as ray indices (all rays by default).

    Atoms and grids are exact sums of kernel values; Pareto profiles use
    quadrature in log radius.  Accepts scalar or array ``r`` (all > 0).
    """
    _check(params)
    ra = np.asarray(r, dtype=float)
    if np.any(~(ra > 0)):
        raise DomainError("tail needs r > 0")
    total = np.zeros(ra.shape)
    for ray in _rays(params, cone):
        total = total + ray_tail(params.alpha, params.p, ray.profile, ra, tol)
    return total if ra.ndim else float(total)


def tail_closed(params: TSParams, r, cone: Optional[Sequence[int]] = None):
    """Same as :func:`tail` but with the closed form for Pareto profiles."""
    _check(params)
    ra = np.asarray(r, dtype=float)
    total = np.zeros(ra.shape)
    for ray in _rays(params, cone):
        total = total + ray_tail(params.alpha, params.p, ray.profile, ra, exact_pareto=True)
    return total if ra.ndim else float(total)


def tail_spectral(params: TSParams, r: float, cone: Optional[Sequence[int]] = None,
                  tol: QuadTol = DEFAULT_TOL) -> float:
    """M_D(r) through the polar route sum_u sigma_u int_r^inf q(t^p, u) t^(-1-alpha) dt.

    Needs a proper law.  Independent of the kernel k, so it serves as a check
    on :func:`tail`.
    """
    sf = to_spectral(params)
    idx = range(len(sf.sigma)) if cone is None else cone
    total = 0.0
    for i in idx:
        (d, wt), q = sf.sigma[i], sf.Qu[i]

        def f(t, q=q):
            if params.p * math.log(t) > 700.0:  # Laplace factor and power both negligible
                return 0.0
            return _profile_laplace(q, t ** params.p) * t ** (-1.0 - params.alpha)

        total += wt * quad_log(f, r, math.inf, tol, points=[max(r, 1.0) * 2])
    return total


@dataclass(frozen=True)
class TailFunction:
    """Callable r -> M_D(r) carrying its quadrature tolerances."""

    params: TSParams
    cone: Optional[tuple] = None
    tol: QuadTol = field(default=DEFAULT_TOL)

    def __call__(self, r):
        return tail(self.params, r, self.cone, self.tol)


def ball_mass(params: TSParams, s: float, tol: QuadTol = DEFAULT_TOL) -> float:
    """M(0 < |x| < s).  Infinite when alpha >= 0 and R != 0."""
    _check(params)
    if not s > 0:
        raise DomainError("ball_mass needs s > 0")
    if params.R.is_zero:
        return 0.0
    alpha, p = params.alpha, params.p
    if alpha >= 0:
        return math.inf
    a = -alpha / p
    ga = math.exp(special.gammaln(a)) / p

    def inner(rho):
        return ga * special.gammainc(a, (s / rho) ** p)

    total = 0.0
    for ray in params.R.rays:
        prof = ray.profile
        if isinstance(prof, Pareto):
            total += prof.integrate(inner, tol, points=(s,))
        else:
            nodes, w = prof.nodes()
            total += float(np.sum(w * ga * special.gammainc(a, (s / nodes) ** p)))
    return total


@dataclass(frozen=True)
class ScaledTailLimits:
    limit_at_zero: float
    limit_at_inf: float


def scaled_tail_limits(params: TSParams) -> ScaledTailLimits:
    """Limits of s^alpha M(|x| > s) as s -> 0 and s -> inf.

    At zero: (1/alpha) int |x|^alpha R(dx) for alpha in (0, 2), infinite for
    alpha <= 0 (when R != 0).  At infinity the limit is always 0.
    """
    _check(params)
    if params.R.is_zero:
        return ScaledTailLimits(0.0, 0.0)
    if params.alpha > 0:
        return ScaledTailLimits(alpha_moment(params.alpha, params.R) / params.alpha, 0.0)
    return ScaledTailLimits(math.inf, 0.0)


def scaled_tail(params: TSParams, s, tol: QuadTol = DEFAULT_TOL):
    """s^alpha M(|x| > s), the quantity whose limits are given above."""
    s = np.asarray(s, dtype=float)
    return s ** params.alpha * tail(params, s, tol=tol)


def is_selfdecomposable(params: TSParams):
    """True when alpha in [0, 2); None (unknown) for alpha < 0.

    For alpha >= 0, q(r^p, u) r^-alpha is a product of non-increasing
    functions, so the criterion always holds.  For alpha < 0 it depends on
    Q_u and no decision procedure is attempted.
    """
    _check(params)
    return True if params.alpha >= 0 else None
