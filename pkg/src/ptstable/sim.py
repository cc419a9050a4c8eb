"""Monte Carlo sampling from TS^p_alpha(R, b).

Jumps larger than epsilon form a compound Poisson sum: the count is
Poisson(lambda), lambda = M(|x| > epsilon), each jump picks a component (an
atom or grid node, or a Pareto profile) in proportion to its truncated mass
and a radius by exact inversion of that component's tail.  Jumps below
epsilon are replaced by a Gaussian with covariance int_{|x|<=eps} x x^T M(dx)
(or by their mean when that is allowed), and the drift is set so the result
has the characteristic exponent with centering x / (1 + |x|^2).

Replicas are generated in fixed-size chunks, each with its own Philox stream
derived from (seed, chunk index), so output does not depend on the number of
worker threads.
"""
from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import optimize

from . import _kernels_nb, kernels
from ._accel import num_threads
from .errors import DomainError, InsufficientSamplesError
from .levy import _check, log_ray_density, ray_tail
from .measure import Pareto, TSParams
from .quadrature import QuadTol, quad_logexp

GAUSSIAN = "gaussian-completion"
DRIFT_ONLY = "drift-only"
CHUNK = 1 << 15
MAGIC = b"TSBATCH1"

_SIM_TOL = QuadTol(epsabs=0.0, epsrel=1e-11, limit=500)


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 1e-3
    n: int = 10_000
    seed: int = 0
    small_jump: str = GAUSSIAN

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.small_jump not in (GAUSSIAN, DRIFT_ONLY):
            raise DomainError(f"unknown small-jump mode {self.small_jump!r}")


@dataclass(frozen=True)
class SimDiagnostics:
    jump_rate: float          # lambda(eps) = M(|x| > eps)
    small_jump_cov: np.ndarray
    drift: np.ndarray
    n_jumps: int = 0


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    config: SimConfig
    diagnostics: SimDiagnostics = field(repr=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# single-ray inversion


def sample_jump_radius(params: TSParams, ray: int, epsilon: float, u01: float) -> float:
    """Radius r >= epsilon with P(r > t) = T(t) / T(epsilon) at probability u01,
    T the tail of M along ray number ``ray``."""
    _check(params)
    if not 0 <= ray < len(params.R.rays):
        raise DomainError(f"ray index {ray} out of range")
    if not 0 < u01 <= 1:
        raise DomainError("u01 must lie in (0, 1]")
    prof = params.R.rays[ray].profile
    alpha, p = params.alpha, params.p
    t0 = ray_tail(alpha, p, prof, epsilon, exact_pareto=True)
    if not t0 > 0:
        raise DomainError("the tail vanishes at epsilon on this ray")
    if u01 == 1:
        return float(epsilon)
    g = lambda v: ray_tail(alpha, p, prof, math.exp(v), exact_pareto=True) / t0 - u01
    lo = math.log(epsilon)
    step, hi = 1.0, lo + 1.0
    while g(hi) > 0:
        lo, step = hi, 2.0 * step
        hi = lo + step
    return math.exp(optimize.brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))


# ---------------------------------------------------------------------------
# per-params plan


def _ray_integrals(alpha: float, p: float, prof, eps: float):
    """(int_0^eps r^2 m, int_0^eps r^3/(1+r^2) m, int_eps^inf r/(1+r^2) m) for the
    radial density m of the ray."""
    lm = lambda v: log_ray_density(alpha, p, prof, v)
    pts = [eps, 1.0]
    if isinstance(prof, Pareto) and prof.r0 > 0:
        pts.append(prof.r0)
    var = quad_logexp(lambda v: 2 * v + lm(v), 0.0, eps, _SIM_TOL, pts)
    near = quad_logexp(lambda v: 3 * v - math.log1p(math.exp(2 * v)) + lm(v), 0.0, eps, _SIM_TOL, pts)
    far = quad_logexp(lambda v: v - _log1p_exp2(v) + lm(v), eps, math.inf, _SIM_TOL, pts)
    return var, near, far


def _log1p_exp2(v: float) -> float:
    return 2 * v + math.log1p(math.exp(-2 * v)) if v > 0 else math.log1p(math.exp(2 * v))


@dataclass
class _Plan:
    alpha: float
    p: float
    dim: int
    rate: float
    drift: np.ndarray
    cov: np.ndarray
    chol: Optional[np.ndarray]
    dirs: np.ndarray        # direction per component
    cum_mass: np.ndarray
    kind: np.ndarray
    lscale: np.ndarray
    lmass0: np.ndarray
    par: np.ndarray
    tab_row: np.ndarray
    k_tab: np.ndarray       # rows: log t, log k, d log k / d log t
    p_tab: np.ndarray       # per Pareto component, same layout for its tail


def _psd_sqrt(cov: np.ndarray) -> Optional[np.ndarray]:
    if not np.any(cov):
        return None
    vals, vecs = np.linalg.eigh(cov)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def _pareto_table(alpha, p, prof, eps, npts=256):
    v0 = math.log(eps)
    top = max(v0, math.log(prof.r0) if prof.r0 > 0 else v0) + 45.0 / prof.rho + 5.0
    tv = np.linspace(v0, top, npts)
    lt, l2 = np.array([_kernels_nb.log_pareto_tail(v, alpha, p, prof.r0, prof.rho, prof.c)
                       for v in tv]).T
    return np.array([tv, lt, -prof.rho * np.exp(l2 - lt)])


def _make_plan(params: TSParams, config: SimConfig) -> _Plan:
    _check(params)
    alpha, p, eps = params.alpha, params.p, float(config.epsilon)
    if config.small_jump == DRIFT_ONLY and alpha >= 0:
        raise DomainError("drift-only small jumps need alpha < 0")
    d = params.dim
    drift = np.array(params.b, dtype=float)
    cov = np.zeros((d, d))
    dirs, masses, kind, lscale, lmass0, par, tab_row = [], [], [], [], [], [], []
    p_tabs = []
    node_logs = []
    for ray in params.R.rays:
        u = np.asarray(ray.direction, dtype=float)
        prof = ray.profile
        var, near, far = _ray_integrals(alpha, p, prof, eps)
        # b + int (x 1{|x| <= eps} - x / (1 + |x|^2)) M(dx): the small jumps
        # enter through their mean, plus a Gaussian when requested
        drift += u * (near - far)
        cov += var * np.outer(u, u)
        if isinstance(prof, Pareto):
            lt0 = _kernels_nb.log_pareto_tail(math.log(eps), alpha, p, prof.r0, prof.rho, prof.c)[0]
            if lt0 > -700:
                dirs.append(u)
                masses.append(math.exp(lt0))
                kind.append(1)
                lscale.append(0.0)
                lmass0.append(lt0)
                par.append((prof.r0, prof.rho, prof.c))
                tab_row.append(len(p_tabs))
                p_tabs.append(_pareto_table(alpha, p, prof, eps))
            continue
        nodes, w = prof.nodes()
        sel = w > 0
        nodes, w = nodes[sel], w[sel]
        lk = kernels.log_kernel_k(eps / nodes, alpha, p)
        keep = lk + np.log(w) > -700
        for node, wi, lki in zip(nodes[keep], w[keep], lk[keep]):
            dirs.append(u)
            masses.append(wi * math.exp(lki))
            kind.append(0)
            lscale.append(math.log(node))
            lmass0.append(lki)
            par.append((0.0, 1.0, 1.0))
            tab_row.append(0)
            node_logs.append(math.log(eps / node))
    if node_logs:
        vlo = min(node_logs)
        vhi = max(vlo + 1.0, math.log(750.0) / p)
        k_v = np.linspace(vlo, vhi, max(64, int(64 * (vhi - vlo))))
        k_lk = kernels.log_kernel_k(np.exp(k_v), alpha, p)
        k_d = -np.exp(-alpha * k_v - np.exp(p * k_v) - k_lk)
        k_tab = np.array([k_v, k_lk, k_d])
    else:
        k_tab = np.array([[0.0, 1.0], [0.0, -1.0], [-1.0, -1.0]])
    p_tab = np.array(p_tabs) if p_tabs else np.array([[[0.0, 1.0], [0.0, -1.0], [-1.0, -1.0]]])
    masses = np.array(masses, dtype=float)
    return _Plan(
        alpha=alpha, p=p, dim=d,
        rate=float(masses.sum()),
        drift=drift, cov=cov, chol=_psd_sqrt(cov) if config.small_jump == GAUSSIAN else None,
        dirs=np.array(dirs, dtype=float).reshape(-1, d),
        cum_mass=np.cumsum(masses),
        kind=np.array(kind, dtype=np.int64),
        lscale=np.array(lscale, dtype=float),
        lmass0=np.array(lmass0, dtype=float),
        par=np.array(par, dtype=float).reshape(-1, 3),
        tab_row=np.array(tab_row, dtype=np.int64),
        k_tab=np.ascontiguousarray(k_tab), p_tab=np.ascontiguousarray(p_tab),
    )


def jump_rate(params: TSParams, epsilon: float) -> float:
    """lambda(eps) = M(|x| > eps), summed over the sampler's components."""
    return _make_plan(params, SimConfig(epsilon=epsilon, n=1)).rate


# ---------------------------------------------------------------------------
# sampling


def _stream(seed: int, key: tuple) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _jumps(plan: _Plan, rng: np.random.Generator, n_jumps: int) -> np.ndarray:
    u_comp = rng.random(n_jumps)
    u_rad = 1.0 - rng.random(n_jumps)  # (0, 1]
    comp, radius = kernels.draw_radii(
        u_comp, u_rad, plan.cum_mass, plan.kind, plan.lscale, plan.lmass0, plan.par,
        plan.tab_row, plan.k_tab, plan.p_tab, plan.alpha, plan.p)
    return radius[:, None] * plan.dirs[comp]


def _chunk(plan: _Plan, seed: int, key: tuple, size: int):
    rng = _stream(seed, key)
    out = np.broadcast_to(plan.drift, (size, plan.dim)).copy()
    if plan.chol is not None:
        out += rng.standard_normal((size, plan.dim)) @ plan.chol.T
    if plan.rate > 0:
        counts = rng.poisson(plan.rate, size)
        total = int(counts.sum())
        # keep the jump buffer bounded by splitting on replica boundaries
        limit = 1 << 22
        start = 0
        while start < size:
            csum = np.cumsum(counts[start:])
            stop = start + max(1, int(np.searchsorted(csum, limit, side="right")))
            cnt = counts[start:stop]
            jumps = _jumps(plan, rng, int(cnt.sum()))
            out[start:stop] += kernels.segment_sum(cnt, jumps)
            start = stop
        return out, total
    return out, 0


def _run(plan: _Plan, seed: int, keys, sizes, threads: Optional[int] = None):
    """Draw one block per (stream key, size) pair, in parallel when allowed."""
    workers = min(threads or num_threads(), len(sizes))
    job = lambda i: _chunk(plan, seed, keys[i], sizes[i])
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(job, range(len(sizes))))
    return [job(i) for i in range(len(sizes))]


def sample(params: TSParams, config: SimConfig, threads: Optional[int] = None) -> SampleBatch:
    """Draw ``config.n`` independent samples of TS^p_alpha(R, b).

    Chunk i of CHUNK replicas uses the Philox stream keyed by (seed, i).
    """
    plan = _make_plan(params, config)
    n = int(config.n)
    sizes = [min(CHUNK, n - s) for s in range(0, n, CHUNK)]
    parts = _run(plan, config.seed, [(i,) for i in range(len(sizes))], sizes, threads)
    values = np.concatenate([v for v, _ in parts], axis=0)
    diag = SimDiagnostics(plan.rate, plan.cov, plan.drift, sum(c for _, c in parts))
    return SampleBatch(values, config, diag)


def empirical_cf(batch: Union[SampleBatch, np.ndarray], z_grid) -> np.ndarray:
    """(1/n) sum_k exp(i <z, X_k>) for each z in ``z_grid``."""
    x = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] == 0:
        raise InsufficientSamplesError("empty batch")
    z = np.asarray(z_grid, dtype=float)
    scalar = z.ndim == 0
    z = z.reshape(-1, x.shape[1]) if x.shape[1] > 1 or z.ndim > 1 else z.reshape(-1, 1)
    out = kernels.ecf(x, z)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# TSBATCH1 files


def write_batch(path, batch: Union[SampleBatch, np.ndarray]) -> None:
    """Write samples as: magic "TSBATCH1", uint64 n, uint64 dim, then n*dim
    little-endian float64 values in row-major order."""
    x = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", x.shape[0], x.shape[1]))
        fh.write(np.ascontiguousarray(x, dtype="<f8").tobytes())


def read_batch(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(24)
        if len(head) != 24 or head[:8] != MAGIC:
            raise DomainError(f"{path} is not a TSBATCH1 file")
        n, d = struct.unpack("<QQ", head[8:])
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * d:
        raise DomainError(f"{path}: expected {n * d} values, found {data.size}")
    return data.reshape(n, d).astype(float)
