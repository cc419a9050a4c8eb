"""Re-parameterizations that leave the Levy measure unchanged.

* :func:`lower_alpha` rewrites TS^p_beta(R) as TS^p_alpha(R') for alpha < beta,
  with R' the scale mixture of R by K^-1 u^(-beta-1) (1 - u^p)^((beta-alpha)/p - 1)
  on (0, 1), K = Gamma((beta - alpha)/p) / p.
* :func:`raise_p` rewrites TS^p_alpha(R) as TS^q_alpha(R') for q > p, with R'
  the mixture of R scaled by s^(-1/q) under s^(alpha/q) f_{p/q}(s) ds.
* :func:`stable_embedding` gives the Rosinski measure of a beta-stable law.

Atom sources become grid profiles whose node weights are an explicit
quadrature rule for the mixing law, so tails, moments and samples of the
output all see the same discretization.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from . import levy
from .errors import DomainError
from .measure import Atom, Grid, Pareto, Ray, RosinskiMeasure, TSParams, validate
from .special_fn import StableDensityOrder, stable_density

_GL_ORDER = 16


def _gl(edges, order: int = _GL_ORDER):
    """Composite Gauss-Legendre nodes and weights over consecutive panels."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w).ravel()
    return nodes, weights


def _graded(top: float, levels: int):
    """Panel edges on [0, top] halving toward 0."""
    e = top * 2.0 ** -np.arange(levels)
    return np.concatenate([[0.0], e[::-1]])


def _merge(rs, mass, dens):
    """Sort nodes, merging coincident radii."""
    order = np.argsort(rs, kind="stable")
    rs, mass, dens = rs[order], mass[order], dens[order]
    keep = mass > 0
    rs, mass, dens = rs[keep], mass[keep], dens[keep]
    uniq, inv = np.unique(rs, return_inverse=True)
    if uniq.size != rs.size:
        mass = np.bincount(inv, weights=mass)
        dens = np.bincount(inv, weights=dens) / np.bincount(inv)
        rs = uniq
    return rs, mass, np.minimum(dens, 1e300)


# ---------------------------------------------------------------------------
# lowering alpha


def _lower_rule(beta: float, alpha: float, p: float, umin: float, n_nodes: int):
    """Nodes u and masses of K^-1 u^(-beta-1) (1 - u^p)^g du on (umin, 1).

    [umin, 1/2] uses Gauss-Legendre in log u.  On [1/2, 1] the substitution
    1 - u^p = w^(1/(g+1)) absorbs the endpoint factor, leaving a smooth
    integrand in w on graded panels.
    """
    g = (beta - alpha) / p - 1.0
    lk = special.gammaln((beta - alpha) / p) - math.log(p)
    n_panels = max(2, n_nodes // _GL_ORDER)
    n_a = max(1, (3 * n_panels) // 4)
    n_b = max(1, n_panels - n_a)
    t, wt = _gl(np.linspace(math.log(umin), math.log(0.5), n_a + 1))
    ua = np.exp(t)
    ma = wt * np.exp(-lk - beta * t + g * np.log1p(-ua ** p))
    da = np.exp(-lk - (beta + 1) * t + g * np.log1p(-ua ** p))
    W = (1.0 - 2.0 ** -p) ** (g + 1.0)
    w, ww = _gl(_graded(W, n_b))
    v = w ** (1.0 / (g + 1.0))
    ub = np.exp(np.log1p(-v) / p)
    # u^(-beta-1) (1-v)^(1/p-1) / (p (g+1)) = (1-v)^(-beta/p-1) / (p (g+1))
    mb = ww * np.exp(-lk + (-beta / p - 1.0) * np.log1p(-v)) / (p * (g + 1.0))
    with np.errstate(divide="ignore", over="ignore"):
        db = np.exp(-lk - (beta + 1) * np.log(ub) + g * np.log(np.maximum(v, 1e-300)))
    return np.concatenate([ua, ub]), np.concatenate([ma, mb]), np.concatenate([da, db])


def _lower_pareto(prof: Pareto, beta, alpha, p, umin, n_nodes):
    """Image of a Pareto profile: a Pareto piece above r0 with constant
    c * J(1), and a grid below r0 with density c rho r^(-rho-1) J(r/r0),
    J(x) = int_0^x K^-1 u^(rho-beta-1) (1-u^p)^g du (an incomplete beta)."""
    g = (beta - alpha) / p - 1.0
    a_j = (prof.rho - beta) / p
    if not a_j > 0:
        raise DomainError("pareto source needs rho > beta")
    lk = special.gammaln((beta - alpha) / p) - math.log(p)
    lb = special.betaln(a_j, g + 1.0)

    def J(x):
        return np.exp(lb - lk - math.log(p)) * special.betainc(a_j, g + 1.0, np.asarray(x) ** p)

    c_far = prof.c * float(J(1.0))
    out = [Pareto(prof.r0, prof.rho, c_far)]
    if prof.r0 > 0:
        n_panels = max(2, n_nodes // _GL_ORDER)
        t, wt = _gl(np.linspace(math.log(umin), math.log(0.5), n_panels // 2 + 1))
        xa = np.exp(t)
        s, ws = _gl(_graded(0.5, n_panels - n_panels // 2))
        xb = 1.0 - s
        x = np.concatenate([xa, xb])
        jac = np.concatenate([wt * xa, ws])
        r = x * prof.r0
        dens = prof.c * prof.rho * r ** (-prof.rho - 1.0) * J(x)
        rs, mass, dens = _merge(r, dens * jac * prof.r0, dens)
        out.append(Grid(tuple(rs), tuple(dens), tuple(mass)))
    return out


def lower_alpha(params: TSParams, alpha: float, umin: float = 1e-6,
                n_nodes: int = 2048) -> TSParams:
    """TS^p_alpha(R') equal in law to TS^p_beta(R), beta = params.alpha > alpha.

    Each atom at rho0 becomes a grid on (umin rho0, rho0) carrying the exact
    quadrature masses of the mixing density; Pareto profiles map to a Pareto
    piece plus a grid below r0; grids map node by node.
    """
    beta, p = params.alpha, params.p
    if not alpha < beta:
        raise DomainError(f"target alpha {alpha} must be below the source index {beta}")
    u, m, d = _lower_rule(beta, alpha, p, umin, n_nodes)
    rays = []
    for ray in params.R.rays:
        prof = ray.profile
        if isinstance(prof, Pareto):
            rays += [Ray(ray.direction, q) for q in _lower_pareto(prof, beta, alpha, p, umin, n_nodes)]
            continue
        nodes, w = prof.nodes()
        sel = w > 0
        rs = (nodes[sel][:, None] * u[None, :]).ravel()
        mass = (w[sel][:, None] * m[None, :]).ravel()
        dens = (w[sel][:, None] / nodes[sel][:, None] * d[None, :]).ravel()
        rs, mass, dens = _merge(rs, mass, dens)
        rays.append(Ray(ray.direction, Grid(tuple(rs), tuple(dens), tuple(mass))))
    return TSParams(alpha, p, params.b, RosinskiMeasure(params.dim, tuple(rays)))


# ---------------------------------------------------------------------------
# raising p


@dataclass(frozen=True)
class KernelNote:
    method: str  # "exact-kernel" or "numeric-kernel"
    order: float
    nodes: int


def _stable_s_range(r: float, tail_tol: float = 1e-14):
    # left tail ~ exp(-c s^(-r/(1-r))), c = (1-r) r^(r/(1-r)); right tail ~ s^-r / Gamma(1-r)
    c = (1 - r) * r ** (r / (1 - r))
    lo = (40.0 / c) ** (-(1 - r) / r)
    hi = (tail_tol * math.gamma(1 - r)) ** (-1.0 / r)
    return lo, hi


def _raise_rule(r: float, panel_width: Optional[float] = None, max_nodes: int = 8192):
    """Nodes s and masses f_r(s) ds on the effective support of f_r."""
    if panel_width is None:
        # f_r sharpens around s = 1 as r -> 1
        panel_width = min(1.0, 2.5 * (1.0 - r))
    lo, hi = _stable_s_range(r)
    n_panels = int(math.ceil((math.log(hi) - math.log(lo)) / panel_width))
    n_panels = min(n_panels, max_nodes // _GL_ORDER)
    t, wt = _gl(np.linspace(math.log(lo), math.log(hi), n_panels + 1))
    s = np.exp(t)
    f = np.asarray(stable_density(s, StableDensityOrder(r)))
    return s, wt * s * f


def raise_p(params: TSParams, q: float, panel_width: Optional[float] = None,
            return_note: bool = False):
    """TS^q_alpha(R') equal in law to TS^p_alpha(R), q > p.

    Atoms (rho0, w) become grids at radii rho0 s^(-1/q) with masses
    w s^(alpha/q) f_{p/q}(s) ds, using Gauss-Legendre nodes in log s.  The
    stable density is exact for p/q = 1/2 and evaluated by quadrature
    otherwise; ``return_note=True`` also returns which one was used.
    """
    alpha, p = params.alpha, params.p
    if not q > p:
        raise DomainError(f"target p {q} must exceed the source p {p}")
    r = p / q
    s, fs = _raise_rule(r, panel_width)
    note = KernelNote("exact-kernel" if r == 0.5 else "numeric-kernel", r, s.size)
    scale = s ** (-1.0 / q)
    m = fs * s ** (alpha / q)
    rays = []
    for ray in params.R.rays:
        prof = ray.profile
        if isinstance(prof, Pareto):
            # scaling a Pareto profile by s^(-1/q) gives another Pareto profile
            wgt = fs * s ** ((alpha - prof.rho) / q)
            if prof.r0 == 0:
                rays.append(Ray(ray.direction, Pareto(0.0, prof.rho, prof.c * float(wgt.sum()))))
            else:
                # a coarser rule keeps the number of Pareto components small
                sc, fc = _raise_rule(r, 2.0 * min(1.0, 2.5 * (1.0 - r)))
                wc = fc * sc ** ((alpha - prof.rho) / q)
                for s_i, w_i in zip(sc, wc):
                    if w_i > 0:
                        rays.append(Ray(ray.direction,
                                        Pareto(prof.r0 * s_i ** (-1.0 / q), prof.rho, prof.c * w_i)))
            continue
        nodes, w = prof.nodes()
        sel = w > 0
        rs = (nodes[sel][:, None] * scale[None, :]).ravel()
        mass = (w[sel][:, None] * m[None, :]).ravel()
        rs, mass, _ = _merge(rs, mass, mass)
        rays.append(Ray(ray.direction, Grid(tuple(rs), tuple(mass), tuple(mass))))
    out = TSParams(alpha, q, params.b, RosinskiMeasure(params.dim, tuple(rays)))
    return (out, note) if return_note else out


# ---------------------------------------------------------------------------
# stable embedding


def stable_embedding(sigma, beta: float, alpha: float, p: float) -> RosinskiMeasure:
    """Rosinski measure K^-1 r^(-1-beta) dr sigma(dxi) whose TS^p_alpha law is
    beta-stable with M(|x| > r, xi) = sigma(xi) r^-beta / beta.

    ``sigma`` is a list of (direction, weight) pairs; each ray gets a Pareto
    profile with r0 = 0.
    """
    if not max(alpha, 0.0) < beta < 2:
        raise DomainError(f"beta must lie in ({max(alpha, 0.0)}, 2), got {beta}")
    lk = special.gammaln((beta - alpha) / p) - math.log(p)
    rays = []
    dim = None
    for d, wt in sigma:
        d = tuple(float(x) for x in np.atleast_1d(d))
        dim = len(d)
        if wt > 0:
            rays.append(Ray(d, Pareto(0.0, beta, wt * math.exp(-lk) / beta)))
    if dim is None:
        raise DomainError("sigma must name at least one direction")
    return RosinskiMeasure(dim, tuple(rays))


# ---------------------------------------------------------------------------
# membership check


@dataclass(frozen=True)
class MembershipReport:
    passed: bool
    max_rel_dev: float
    tol: float
    per_direction: dict


def _by_direction(params: TSParams):
    groups = {}
    for i, ray in enumerate(params.R.rays):
        key = tuple(round(x, 12) for x in ray.direction)
        groups.setdefault(key, []).append(i)
    return groups


def verify_membership(a: TSParams, b: TSParams, r_grid, tol: float = 1e-6) -> MembershipReport:
    """Compare the Levy tails of two parameter sets direction by direction.

    Passes when the largest relative deviation over ``r_grid`` and all
    charged directions is below ``tol``.
    """
    for prm in (a, b):
        rep = validate(prm.alpha, prm.R)
        if not rep.valid:
            raise DomainError(f"invalid parameters: {rep.violations}")
    if a.dim != b.dim:
        return MembershipReport(False, math.inf, tol, {})
    r = np.asarray(r_grid, dtype=float)
    ga, gb = _by_direction(a), _by_direction(b)
    per = {}
    worst = 0.0
    for key in sorted(set(ga) | set(gb)):
        ta = levy.tail(a, r, ga[key]) if key in ga else np.zeros(r.shape)
        tb = levy.tail(b, r, gb[key]) if key in gb else np.zeros(r.shape)
        scale = np.maximum(np.abs(ta), np.abs(tb))
        with np.errstate(invalid="ignore", divide="ignore"):
            dev = np.where(scale > 0, np.abs(ta - tb) / scale, 0.0)
        per[key] = float(dev.max())
        worst = max(worst, per[key])
    return MembershipReport(worst < tol, worst, tol, per)
