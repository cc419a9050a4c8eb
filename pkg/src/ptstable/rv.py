"""Regular variation: classification of Rosinski measures, the ratio of the
tails of R and M, a Stieltjes-convolution harness for the Tauberian step, the
Hill estimator and domain-of-attraction experiments.

A Rosinski measure with Pareto profiles has tails R(|x| > r, ray) = c r^-rho
beyond r0, so it varies regularly with the smallest rho present and limit
weights proportional to the c's of the rays attaining it.  Measures of
bounded support (atoms and grids only) are not regularly varying.  The
Levy measure then satisfies

    R_D(r) / M_D(r) -> p / Gamma((rho - alpha) / p)   (r -> inf).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy import special

from . import levy, moments, sim
from .errors import DomainError, InsufficientSamplesError
from .measure import Pareto, RosinskiMeasure, TSParams
from .quadrature import QuadTol, quad
from .special_fn import KernelParams, kernel_mellin

_RHO_TOL = 1e-12


@dataclass(frozen=True)
class RVClassification:
    index: float
    sigma_hat: Dict[tuple, float]
    evidence: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.index) and self.index >= 0):
            raise DomainError("index must be finite and non-negative")
        w = list(self.sigma_hat.values())
        if any(x < 0 for x in w) or not any(x > 0 for x in w):
            raise DomainError("limit weights must be non-negative and not all zero")


def _mass_beyond(prof, r: float) -> float:
    if isinstance(prof, Pareto):
        return prof.mass_beyond(r)
    nodes, w = prof.nodes()
    return float(w[nodes > r].sum())


def rosinski_tail(R: RosinskiMeasure, r, cone: Optional[Sequence[int]] = None):
    """R_D(r) = R(|x| > r, ray in D), D as ray indices (all rays by default)."""
    idx = range(len(R.rays)) if cone is None else cone
    ra = np.asarray(r, dtype=float)
    out = np.array([sum(_mass_beyond(R.rays[i].profile, float(x)) for i in idx)
                    for x in np.atleast_1d(ra).ravel()])
    return out.reshape(ra.shape) if ra.ndim else float(out[0])


def _leading(R: RosinskiMeasure):
    """Smallest Pareto index and the summed tail coefficient per direction."""
    rhos = [ray.profile.rho for ray in R.rays if isinstance(ray.profile, Pareto)
            and ray.profile.c > 0]
    if not rhos:
        return None, {}
    rho = min(rhos)
    coef: Dict[tuple, float] = {}
    for ray in R.rays:
        d = tuple(round(x, 12) for x in ray.direction)
        coef.setdefault(d, 0.0)
        prof = ray.profile
        if isinstance(prof, Pareto) and abs(prof.rho - rho) <= _RHO_TOL * max(1.0, rho):
            coef[d] += prof.c
    return rho, coef


def classify_measure(R: RosinskiMeasure) -> Optional[RVClassification]:
    """Index and normalized limit weights of a regularly varying R, or None
    when R has bounded support."""
    rho, coef = _leading(R)
    if rho is None:
        return None
    total = sum(coef.values())
    sigma_hat = {d: c / total for d, c in coef.items()}
    # r^rho R(|x| > r) / total -> 1
    r = np.geomspace(10.0, 1e6, 6) * max(1.0, max(
        (ray.profile.r0 for ray in R.rays if isinstance(ray.profile, Pareto)), default=1.0))
    ratio = r ** rho * rosinski_tail(R, r) / total
    return RVClassification(rho, sigma_hat, {"r": r, "scaled_tail": ratio})


# ---------------------------------------------------------------------------
# R versus M


def tail_ratio_limit(rho: float, alpha: float, p: float) -> float:
    """p / Gamma((rho - alpha) / p)."""
    return p * math.exp(-special.gammaln((rho - alpha) / p))


@dataclass(frozen=True)
class TailRatioReport:
    rho: float
    limit: float
    r_grid: np.ndarray
    ratios: np.ndarray
    rel_errors: np.ndarray

    @property
    def last_rel_error(self) -> float:
        return float(self.rel_errors[-1])


def tail_ratio_check(params: TSParams, rho: Optional[float] = None, r_grid=(10.0, 50.0, 500.0),
                     cone: Optional[Sequence[int]] = None) -> TailRatioReport:
    """R_D(r) / M_D(r) on ``r_grid`` against its limit p / Gamma((rho - alpha)/p)."""
    if rho is None:
        cls = classify_measure(params.R)
        if cls is None:
            raise DomainError("R is not regularly varying")
        rho = cls.index
    if not rho > max(params.alpha, 0.0):
        raise DomainError(f"index {rho} must exceed max(alpha, 0) = {max(params.alpha, 0.0)}")
    r = np.asarray(r_grid, dtype=float)
    ratios = rosinski_tail(params.R, r, cone) / levy.tail_closed(params, r, cone)
    lim = tail_ratio_limit(rho, params.alpha, params.p)
    return TailRatioReport(rho, lim, r, ratios, np.abs(ratios / lim - 1.0))


# ---------------------------------------------------------------------------
# Stieltjes convolution harness


def _check_monotone(U: Callable, grid: np.ndarray):
    vals = np.array([U(float(t)) for t in grid])
    if not np.all(np.isfinite(vals)):
        raise DomainError("U must be finite on (0, inf)")
    d = np.diff(vals)
    if not (np.all(d >= 0) or np.all(d <= 0)):
        raise DomainError("U is not monotone")
    return vals


def tauberian_convolve(U: Callable[[float], float], kp: Optional[KernelParams], x_grid,
                       kernel: str = "tempering", gamma: float = -4.0,
                       tol: QuadTol = QuadTol(epsabs=0.0, epsrel=1e-11, limit=500)) -> np.ndarray:
    """int_(0,inf) k(x/t) dU(t) for each x in ``x_grid``.

    ``kernel="tempering"`` uses k(s) = int_s^inf t^(-alpha-1) e^(-t^p) dt and
    integrates by parts against V = U - U(inf),
    int k(x/t) dU = -int V(t) (x/t)^-alpha e^(-(x/t)^p) dt/t,
    valid when V(t) k(x/t) vanishes at both ends.  ``kernel="indicator"``
    uses k(s) = 1{s >= 1}, for which the integral is U(x) - U(0+), with U(0+)
    read off at the bottom of the check grid.
    U must be monotone and satisfy limsup_{r -> 0} |U(r)| / r^gamma < inf;
    both are checked on a grid.
    """
    xs = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if np.any(~(xs > 0)):
        raise DomainError("x must be positive")
    grid = np.geomspace(1e-8 * xs.min(), 1e8 * xs.max(), 801)
    vals = _check_monotone(U, grid)
    small = np.geomspace(1e-12, 1e-4, 9)
    growth = np.array([abs(U(float(t))) for t in small]) / small ** gamma
    if not np.all(np.isfinite(growth)) or growth.max() > 1e3 * max(growth[-1], 1.0):
        raise DomainError(f"|U(r)| / r^{gamma} is not bounded near 0")
    if kernel == "indicator":
        return np.array([U(float(x)) - vals[0] for x in xs])
    if kernel != "tempering":
        raise DomainError(f"unknown kernel {kernel!r}")
    if kp is None:
        raise DomainError("the tempering kernel needs KernelParams")
    alpha, p = kp.alpha, kp.p
    try:
        u_inf = float(U(1e300))
    except (OverflowError, ZeroDivisionError):
        u_inf = float(vals[-1])
    if not math.isfinite(u_inf):
        u_inf = float(vals[-1])

    def one(x):
        lx = math.log(x)

        def f(v):
            ls = lx - v
            if p * ls > 700 or v > 700:
                return 0.0
            return -(U(math.exp(v)) - u_inf) * math.exp(-alpha * ls - math.exp(p * ls))

        lo = lx - math.log(750.0) / p - 1.0
        return quad(f, lo, lx, tol) + quad(f, lx, math.inf, tol)

    return np.array([one(float(x)) for x in xs])


def tauberian_limit(c: float, rho: float, kp: KernelParams) -> float:
    """c rho k_hat(rho), the coefficient of x^rho l(x) in the convolution when
    U(x) ~ c x^rho l(x).  For a tail U = -R(|x| > t) the index rho is negative."""
    return c * rho * kernel_mellin(rho, kp).real


# ---------------------------------------------------------------------------
# sample diagnostics


def hill_estimate(samples, k_order: int) -> float:
    """Hill estimator of the tail index from the k_order largest values."""
    x = np.asarray(samples, dtype=float).ravel()
    if np.any(~(x > 0)):
        raise DomainError("Hill estimation needs positive samples")
    k = int(k_order)
    if not 1 <= k < x.size:
        raise InsufficientSamplesError(f"k_order must lie in [1, {x.size - 1}], got {k}")
    top = np.partition(x, x.size - k - 1)[x.size - k - 1:]
    top.sort()
    h = float(np.mean(np.log(top[1:])) - math.log(top[0]))
    if not h > 0:
        raise InsufficientSamplesError("zero log-excesses: the top order statistics coincide")
    return 1.0 / h


DEFAULT_Z = (-2.0, -1.0, -0.5, -0.1, 0.1, 0.5, 1.0, 2.0)


def stable_limit_exponent(params: TSParams, z) -> complex:
    """Exponent of the gamma-stable limit of (S_n - centering) / n^(1/gamma).

    The limit Levy measure has tail K c_u r^-gamma on each ray u, where c_u
    is the leading Pareto coefficient and K = Gamma((gamma - alpha)/p)/p, and
    int_0^inf (e^(iwr) - 1 [- iwr]) gamma r^(-gamma-1) dr = gamma Gamma(-gamma) (-iw)^gamma.
    """
    gam, coef = _leading(params.R)
    K = math.exp(special.gammaln((gam - params.alpha) / params.p)) / params.p
    z = np.atleast_1d(np.asarray(z, dtype=float))
    total = 0.0j
    for d, c in coef.items():
        w = float(np.dot(d, z))
        if w != 0.0 and c > 0:
            total += K * c * gam * special.gamma(-gam) * (-1j * w) ** gam
    return complex(total)


@dataclass(frozen=True)
class DOAReport:
    gamma: float
    n_values: tuple
    distances: np.ndarray
    z_grid: np.ndarray
    ecf: np.ndarray           # per n, empirical CF of the normalized sums
    target: np.ndarray        # limit CF on the z grid

    @property
    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.distances) < 0))


def doa_experiment(params: TSParams, n_values=(100, 1000, 10000), m_sums: int = 200,
                   seed: int = 0, epsilon: float = 1e-2, z_grid=DEFAULT_Z,
                   threads: Optional[int] = None) -> DOAReport:
    """CF distance between normalized sums of n i.i.d. TS variates and the
    gamma-stable limit, for each n in ``n_values``.

    Sums are normalized by a_n = n^(1/gamma); for gamma > 1 they are first
    centered by n times the mean.  Replica j at level i uses the stream keyed
    by (seed, i, j).  The distance is the largest absolute difference over
    the z grid (multiples of each coordinate axis when dim > 1).
    """
    cls = classify_measure(params.R)
    if cls is None:
        raise DomainError("R has bounded support: not regularly varying")
    gam = cls.index
    if not max(params.alpha, 0.0) < gam < 2.0:
        raise DomainError(f"index {gam} outside (max(alpha, 0), 2)")
    if abs(gam - 1.0) < 1e-9:
        raise DomainError("index 1 needs a centering that is not implemented")
    d = params.dim
    zs = np.asarray(z_grid, dtype=float)
    if zs.ndim == 1:
        zs = np.concatenate([np.outer(zs, e) for e in np.eye(d)]) if d > 1 else zs[:, None]
    target = np.exp([stable_limit_exponent(params, z) for z in zs])
    mean = (np.array([moments.cumulant(params, tuple(e)) for e in np.eye(d, dtype=int)])
            if gam > 1 else np.zeros(d))
    plan = sim._make_plan(params, sim.SimConfig(epsilon=epsilon, n=1, seed=seed))
    dists, ecfs = [], []
    for i, n in enumerate(n_values):
        n = int(n)
        parts = sim._run(plan, seed, [(i, j) for j in range(m_sums)], [n] * m_sums, threads)
        sums = np.array([v.sum(axis=0) for v, _ in parts])
        normed = (sums - n * mean) / n ** (1.0 / gam)
        e = sim.empirical_cf(normed, zs)
        ecfs.append(e)
        dists.append(float(np.max(np.abs(e - target))))
    return DOAReport(gam, tuple(int(n) for n in n_values), np.array(dists), zs,
                     np.array(ecfs), target)
