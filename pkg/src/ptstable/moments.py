"""Cumulants and moment-finiteness criteria.

For a multi-index k of order q = sum(k) >= 2 the cumulant is

    c_k = Gamma((q - alpha)/p) / p * int prod_j x_j^k_j R(dx),

and the mean is b_i plus a double integral against R.  Finiteness of
(absolute, mixed or exponential) moments is decided from R: atoms and grids
have bounded support, Pareto profiles have finite moments exactly below their
index.
"""
from __future__ import annotations

import math
from typing import Union

import numpy as np
from scipy import special

from . import levy
from .errors import DomainError, MomentInfiniteError, UnsupportedParameterError
from .measure import Pareto, TSParams
from .quadrature import DEFAULT_TOL, QuadTol, quad_log

FINITE = "finite"
INFINITE = "infinite"
SUFFICIENT_ONLY = "sufficient-only"
UNDETERMINED = "undetermined"


def _multi_index(params: TSParams, k) -> tuple:
    k = tuple(int(x) for x in np.atleast_1d(k))
    if len(k) != params.dim:
        raise DomainError(f"multi-index {k} does not match dimension {params.dim}")
    if any(x < 0 for x in k):
        raise DomainError("multi-index entries must be non-negative")
    return k


def _ray_order(direction, k) -> Union[float, None]:
    """Order of prod x_j^k_j along a ray, or None when the product vanishes."""
    q = 0
    for u, kj in zip(direction, k):
        if kj > 0:
            if u == 0.0:
                return None
            q += kj
    return q


def _profile_moment_finite(prof, q: float) -> bool:
    if isinstance(prof, Pareto):
        return q < prof.rho
    return True


def moment_finite(params: TSParams, k=None, q: float = None) -> bool:
    """Is the moment of order ``q`` (or the mixed moment ``k``) finite?

    Orders below alpha are always finite for a valid law; at q = alpha the
    criterion is int_{|x|>1} |x|^alpha log|x| R(dx) < inf, above it
    int_{|x|>1} |x|^q R(dx) < inf.  For the profiles here all three reduce to
    q < rho on each Pareto ray.  Mixed moments use, per ray, the order of the
    coordinates that do not vanish on that ray.
    """
    if (k is None) == (q is None):
        raise DomainError("give exactly one of a multi-index k or a norm order q")
    if q is not None:
        if not q >= 0:
            raise DomainError("moment order must be non-negative")
        return all(_profile_moment_finite(r.profile, q) for r in params.R.rays)
    k = _multi_index(params, k)
    for ray in params.R.rays:
        qe = _ray_order(ray.direction, k)
        if qe is not None and not _profile_moment_finite(ray.profile, qe):
            return False
    return True


def _cubic_weight(r: float) -> float:
    """r^3 / (1 + r^2) without overflow at either end."""
    return r * r * r / (1.0 + r * r) if r < 1.0 else r / (1.0 + 1.0 / (r * r))


def _log_cubic_weight(r: float) -> float:
    lr = math.log(r)
    return 3.0 * lr - math.log1p(r * r) if r < 1.0 else lr - math.log1p(1.0 / (r * r))


def _mean_inner(rho: float, alpha: float, p: float, tol: QuadTol) -> float:
    """rho^3 int_0^inf t^(2-alpha) e^(-t^p) / (1 + rho^2 t^2) dt."""
    f = lambda t: t ** (2.0 - alpha) * math.exp(-(t ** p)) / (1.0 + (rho * t) ** 2)
    top = 750.0 ** (1.0 / p)  # e^(-t^p) underflows beyond
    return rho ** 3 * quad_log(f, 0.0, top, tol, points=[1.0 / rho, 1.0])


def cumulant(params: TSParams, k, tol: QuadTol = DEFAULT_TOL) -> float:
    """Cumulant c_k of TS^p_alpha(R, b).

    For order 1 (k = e_i) this is the mean
    b_i + int int x_i |x|^2 t^(2-alpha) / (1 + |x|^2 t^2) e^(-t^p) dt R(dx).
    """
    k = _multi_index(params, k)
    q = sum(k)
    if q == 0:
        raise DomainError("cumulants need order >= 1")
    if not moment_finite(params, k=k):
        raise MomentInfiniteError(f"moment of order {k} is infinite")
    alpha, p = params.alpha, params.p
    if q == 1:
        i = k.index(1)
        total = params.b[i]
        for ray in params.R.rays:
            u = ray.direction[i]
            if u == 0.0:
                continue
            prof = ray.profile
            if isinstance(prof, Pareto):
                # same double integral with the order swapped: the t-integral
                # is the closed-form radial density of M along the ray
                # in logs: the density alone overflows for tiny r
                f = lambda r: 0.0 if r <= 0.0 else math.exp(
                    _log_cubic_weight(r) + levy.log_ray_density(alpha, p, prof, math.log(r)))
                total += u * quad_log(f, 0.0, math.inf, tol, points=[prof.r0, 1.0])
            else:
                total += u * prof.integrate(lambda rho: _mean_inner(rho, alpha, p, tol), tol)
        return total
    total = 0.0
    for ray in params.R.rays:
        qe = _ray_order(ray.direction, k)
        if qe is None:
            continue
        coef = float(np.prod([u ** kj for u, kj in zip(ray.direction, k)]))
        total += coef * ray.profile.moment(q)
    return math.exp(special.gammaln((q - alpha) / p)) / p * total


# ---------------------------------------------------------------------------
# exponential moments


def _support_max(prof) -> float:
    if isinstance(prof, Pareto):
        return math.inf
    r, w = prof.nodes()
    pos = r[w > 0]
    return float(pos.max()) if pos.size else 0.0


def _boundary_integral(prof, alpha: float, p: float, theta: float) -> float:
    """int over {0 < r^-p - theta < 1} of (r^-p - theta)^(alpha/p) (alpha < 0)
    or |log(r^-p - theta)| (alpha = 0) against the profile."""
    r, w = prof.nodes()
    gap = r ** -p - theta
    sel = (gap > 0) & (gap < 1) & (w > 0)
    if alpha < 0:
        vals = gap[sel] ** (alpha / p)
    else:
        vals = np.abs(np.log(gap[sel]))
    return float(np.sum(w[sel] * vals))


def exp_moment_finite(params: TSParams, theta: float, q_exp: Union[float, str]) -> str:
    """Decide int e^(theta |x|^q) mu(dx) < inf (or e^(theta |x| log|x|) for
    ``q_exp="log"``).

    Returns ``"finite"`` or ``"infinite"`` for the exact criteria (q = p with
    p <= 1, and the log case), ``"sufficient-only"`` when the sufficient
    criterion for q < p certifies finiteness, and ``"undetermined"`` when
    that criterion fails (no conclusion either way).
    """
    if not theta > 0:
        raise DomainError("theta must be positive")
    rays = params.R.rays
    if q_exp == "log":
        return FINITE if not rays else INFINITE
    q_exp = float(q_exp)
    alpha, p = params.alpha, params.p
    if not rays:
        return FINITE
    if q_exp == p:
        if p > 1:
            raise UnsupportedParameterError("exact exponential-moment criteria need p <= 1")
        thr = theta ** (-1.0 / p)
        sup = max(_support_max(r.profile) for r in rays)
        if alpha > 0:
            return FINITE if sup <= thr else INFINITE
        if sup >= thr:
            return INFINITE
        total = sum(_boundary_integral(r.profile, alpha, p, theta) for r in rays)
        return FINITE if math.isfinite(total) else INFINITE
    if 0 < q_exp < p and q_exp <= 1:
        # int_{|x|>1} exp(A (theta |x|^q)^(p/(p-q))) |x|^(-alpha q/(p-q)) R(dx)
        if math.isfinite(sufficient_integral(params, theta, q_exp)):
            return SUFFICIENT_ONLY
        return UNDETERMINED
    raise UnsupportedParameterError(f"no criterion for q = {q_exp} with p = {p}")


def a_pq(p: float, q: float) -> float:
    """A_{p,q} = (q/p)^(q/(p-q)) (1 - q/p)."""
    return (q / p) ** (q / (p - q)) * (1.0 - q / p)


def sufficient_integral(params: TSParams, theta: float, q_exp: float) -> float:
    """Value of int_{|x|>1} exp(A_{p,q} (theta |x|^q)^(p/(p-q))) |x|^(-alpha q/(p-q)) R(dx)."""
    p, alpha = params.p, params.alpha
    A = a_pq(p, q_exp)
    e1 = p / (p - q_exp)
    e2 = -alpha * q_exp / (p - q_exp)
    total = 0.0
    for ray in params.R.rays:
        prof = ray.profile
        if isinstance(prof, Pareto):
            return math.inf
        r, w = prof.nodes()
        sel = r > 1
        with np.errstate(over="ignore"):
            total += float(np.sum(w[sel] * np.exp(A * (theta * r[sel] ** q_exp) ** e1)
                                  * r[sel] ** e2))
    return total


def special_case_p_2q(params: TSParams, theta: float, q_exp: float) -> bool:
    """Exact criterion when p = 2 q:
    int_{|x|>1} e^(theta^2 |x|^(2q) / 4) |x|^(-q-alpha) R(dx) < inf."""
    if not math.isclose(params.p, 2.0 * q_exp, rel_tol=1e-12):
        raise DomainError(f"needs p = 2 q, got p = {params.p}, q = {q_exp}")
    if not theta > 0:
        raise DomainError("theta must be positive")
    total = 0.0
    for ray in params.R.rays:
        prof = ray.profile
        if isinstance(prof, Pareto):
            return False
        r, w = prof.nodes()
        sel = r > 1
        with np.errstate(over="ignore"):
            total += float(np.sum(w[sel] * np.exp(theta ** 2 * r[sel] ** (2 * q_exp) / 4)
                                  * r[sel] ** (-q_exp - params.alpha)))
    return math.isfinite(total)
