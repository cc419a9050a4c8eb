"""Vectorized numpy versions of the hot kernels in :mod:`ptstable._kernels_nb`.

Same algorithms, written over arrays with masks instead of scalar loops.  The
first parameter of the incomplete gamma is a scalar throughout, which keeps
the recurrence depth uniform across the array.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from . import _kernels_nb as nb

_FPMIN = 1e-300
_TOL = 1e-16
_MAXIT = 100000


def _log_lower_series(a, x):
    x = np.asarray(x, dtype=float)
    ap = np.full(x.shape, float(a))
    term = np.full(x.shape, 1.0 / a)
    total = term.copy()
    active = np.ones(x.shape, dtype=bool)
    for _ in range(_MAXIT):
        ap += 1.0
        term = np.where(active, term * x / ap, 0.0)
        total += term
        active &= np.abs(term) >= np.abs(total) * _TOL
        if not active.any():
            break
    return a * np.log(x) - x + np.log(total)


def _log_upper_cf(a, x):
    x = np.asarray(x, dtype=float)
    b = x + 1.0 - a
    c = np.full(x.shape, 1.0 / _FPMIN)
    d = np.where(np.abs(b) > _FPMIN, 1.0 / np.where(b == 0, 1.0, b), 1.0 / _FPMIN)
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h *= delta
        active &= np.abs(delta - 1.0) >= nb._CF_TOL
        if not active.any():
            break
    return a * np.log(x) - x + np.log(h)


def _exp1_small(x):
    total = np.zeros(x.shape)
    term = np.ones(x.shape)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, _MAXIT):
        term = term * (-x / k)
        inc = np.where(active, term / k, 0.0)
        total += inc
        active &= np.abs(inc) >= _TOL * np.abs(total)
        if not active.any():
            break
    return -nb.EULER_GAMMA - np.log(x) - total


def log_gamma_upper_arr(a, x):
    a = float(a)
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    pos = x > 0
    if a > 0.0:
        if a < 0.05:
            near = pos & (x < 1.0)
            out[near] = [nb.log_near_int_small_x(0, a, float(v)) for v in x[near]]
            cf = pos & ~near
            if cf.any():
                out[cf] = _log_upper_cf(a, x[cf])
            return out
        ser = pos & (x < a + 1.0)
        cf = pos & ~ser
        if ser.any():
            lg = math.lgamma(a)
            frac = np.exp(_log_lower_series(a, x[ser]) - lg)
            out[ser] = lg + np.log1p(-frac)
        if cf.any():
            out[cf] = _log_upper_cf(a, x[cf])
        return out
    cf = pos & (x >= 1.0)
    rec = pos & ~cf
    if cf.any():
        out[cf] = _log_upper_cf(a, x[cf])
    if rec.any():
        xs = x[rec]
        m = int(round(-a))
        eps = a + m
        if 1e-14 <= abs(eps) < 0.05:
            out[rec] = [nb.log_near_int_small_x(m, eps, float(v)) for v in xs]
            return out
        fl = math.floor(a)
        a0 = a - fl
        lx = np.log(xs)
        if a0 < 1e-14 or a0 > 1.0 - 1e-14:
            cur = 0.0
            steps = int(round(-a))
            val = _exp1_small(xs)
        else:
            cur = a0
            steps = int(-fl)
            lg = math.lgamma(a0)
            val = np.exp(lg - a0 * lx) * (1.0 - np.exp(_log_lower_series(a0, xs) - lg))
        ex = np.exp(-xs)
        for _ in range(steps):
            cur -= 1.0
            val = (xs * val - ex) / cur
        out[rec] = np.log(val) + cur * lx
    return out


def log_gamma_lower_arr(a, x):
    a = float(a)
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    ser = x < a + 1.0
    if ser.any():
        out[ser] = _log_lower_series(a, x[ser])
    if (~ser).any():
        lg = gammaln(a)
        out[~ser] = lg + np.log1p(-np.exp(_log_upper_cf(a, x[~ser]) - lg))
    return out


def log_kernel_k_arr(t, alpha, p):
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape)
    zero = t <= 0
    with np.errstate(divide="ignore"):
        lx = p * np.log(np.where(zero, 1.0, t))
    big = ~zero & (lx > 700.0)
    small = ~zero & (lx < -690.0)
    mid = ~(zero | big | small)
    out[mid] = log_gamma_upper_arr(-alpha / p, np.exp(lx[mid])) - math.log(p)
    out[big] = -np.inf
    if zero.any():
        out[zero] = nb.log_kernel_k(0.0, alpha, p)
    if small.any():
        out[small] = [nb.log_kernel_k_small(math.log(x), alpha, p) for x in t[small]]
    return out


def log_pareto_tail_arr(v, alpha, p, r0, rho, c):
    v = np.asarray(v, dtype=float)
    ap = (rho - alpha) / p
    lc = math.log(c)
    if r0 <= 0.0:
        t2 = lc - rho * v + gammaln(ap) - math.log(p)
        return t2, t2
    x = np.exp(p * (v - math.log(r0)))
    t2 = lc - rho * v + log_gamma_lower_arr(ap, x) - math.log(p)
    t1 = lc - rho * math.log(r0) + log_kernel_k_arr(np.exp(v) / r0, alpha, p)
    return np.logaddexp(t1, t2), t2


def _table_start(ly, tab_v, tab_y, tab_d):
    """Bracket and cubic Hermite start from a decreasing table."""
    idx = np.searchsorted(-tab_y, -ly, side="left")
    idx = np.clip(idx, 1, tab_y.shape[0] - 1)
    v0, v1 = tab_v[idx - 1], tab_v[idx]
    y0, y1 = tab_y[idx - 1], tab_y[idx]
    h = y1 - y0
    s = (ly - y0) / h
    s2, s3 = s * s, s * s * s
    v = ((2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * h / tab_d[idx - 1]
         + (3 * s2 - 2 * s3) * v1 + (s3 - s2) * h / tab_d[idx])
    v = np.where((v >= v0) & (v <= v1), v, 0.5 * (v0 + v1))
    return v, v0, v1


def _invert_tail(ly, kind, alpha, p, r0, rho, c, tab_v, tab_y, tab_d):
    v, vlo, vhi = _table_start(ly, tab_v, tab_y, tab_d)
    for _ in range(2):
        if kind == 0:
            lt = log_kernel_k_arr(np.exp(v), alpha, p)
            dg = -np.exp(-alpha * v - np.exp(p * v) - lt)
        else:
            lt, l2 = log_pareto_tail_arr(v, alpha, p, r0, rho, c)
            dg = -rho * np.exp(l2 - lt)
        ok = dg < 0.0
        step = np.where(ok, (lt - ly) / np.where(ok, dg, -1.0), 0.0)
        v = np.clip(v - step, vlo, vhi)
    v = np.where(ly >= tab_y[0], tab_v[0], v)
    beyond = ly < tab_y[-1]
    if beyond.any():
        v[beyond] = [nb.invert_tail(y, kind, alpha, p, r0, rho, c, tab_v, tab_y, tab_d)
                     for y in ly[beyond]]
    return v


def draw_radii(u_comp, u_rad, cum_mass, kind, lscale, lmass0, par, tab_row,
               k_tab, p_tab, alpha, p):
    total = cum_mass[-1]
    comp = np.searchsorted(cum_mass, u_comp * total, side="right")
    comp = np.minimum(comp, cum_mass.shape[0] - 1).astype(np.int64)
    ly = np.log(u_rad) + lmass0[comp]
    radius = np.empty(u_comp.shape[0])
    node = kind[comp] == 0
    if node.any():
        v = _invert_tail(ly[node], 0, alpha, p, 0.0, 1.0, 1.0, k_tab[0], k_tab[1], k_tab[2])
        radius[node] = np.exp(v + lscale[comp[node]])
    if (~node).any():
        for ci in np.unique(comp[~node]):
            sel = comp == ci
            t = p_tab[tab_row[ci]]
            v = _invert_tail(ly[sel], 1, alpha, p, par[ci, 0], par[ci, 1], par[ci, 2],
                             t[0], t[1], t[2])
            radius[sel] = np.exp(v)
    return comp, radius


def segment_sum(counts, values):
    n = counts.shape[0]
    owner = np.repeat(np.arange(n), counts)
    out = np.empty((n, values.shape[1]))
    for k in range(values.shape[1]):
        out[:, k] = np.bincount(owner, weights=values[:, k], minlength=n)
    return out


def ecf(x, z, block=200_000):
    n = x.shape[0]
    acc = np.zeros(z.shape[0], dtype=complex)
    for start in range(0, n, block):
        phase = x[start:start + block] @ z.T
        acc += np.exp(1j * phase).sum(axis=0)
    return acc / n
