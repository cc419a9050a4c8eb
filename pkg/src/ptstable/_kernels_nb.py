"""Scalar kernels written in the numba-compilable subset of Python.

With numba disabled these are plain Python functions; the scalar entry points
are still used by the quadrature layer, the array loops are not.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

EULER_GAMMA = 0.5772156649015329
_FPMIN = 1e-300
_TOL = 1e-16
_CF_TOL = 4e-16  # |delta - 1| can stall at one ulp, so stop a little above it
_MAXIT = 100000


@njit
def log_lower_series(a, x):
    """log of gamma(a, x) for a > 0, x > 0 via the power series."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _TOL:
            break
    return a * math.log(x) - x + math.log(total)


@njit
def log_upper_cf(a, x):
    """log of Gamma(a, x) by the modified Lentz continued fraction.

    Valid for any real a; converges quickly once x >= max(a + 1, 1).
    """
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b if abs(b) > _FPMIN else 1.0 / _FPMIN
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            break
    return a * math.log(x) - x + math.log(h)


@njit
def exp1_small(x):
    """E1(x) = Gamma(0, x) for 0 < x < 1 from the convergent series."""
    total = 0.0
    term = 1.0
    for k in range(1, _MAXIT):
        term *= -x / k
        inc = term / k
        total += inc
        if abs(inc) < _TOL * abs(total):
            break
    return -EULER_GAMMA - math.log(x) - total


_ZETA = (1.6449340668482264, 1.2020569031595942, 1.0823232337111381,
         1.0369277551433699, 1.0173430619844491, 1.0083492773819228,
         1.0040773561979443, 1.0020083928260822, 1.0009945751278181)


@njit
def log_near_int_small_x(m, eps, x):
    """log Gamma(-m + eps, x) for 0 < x < 1 and small |eps|.

    Uses Gamma(a, x) = Gamma(a) - sum_n (-1)^n x^(a+n) / (n! (a+n)) with the
    two singular pieces (Gamma(a) and the n = m term) merged analytically.
    Everything is carried in units of x^a to avoid overflow.
    """
    a = -m + eps
    lx = math.log(x)
    # log Gamma(1 + eps) by its Taylor series
    lg1 = -EULER_GAMMA * eps
    pw = -eps
    for k in range(2, 11):
        pw *= -eps
        lg1 += _ZETA[k - 2] * pw / k
    s = 0.0
    for j in range(1, m + 1):
        s += math.log1p(-eps / j)
    lfact = math.lgamma(m + 1.0)
    diff = lg1 - s - eps * lx
    sign = -1.0 if m % 2 == 1 else 1.0
    head = sign * math.exp(m * lx - lfact) * math.expm1(diff) / eps
    total = 0.0
    term = 1.0
    for n in range(0, 200):
        if n > 0:
            term *= -x / n
        if n != m:
            inc = term / (a + n)
            total += inc
            if n > m and abs(inc) < 1e-17 * abs(total):
                break
    return math.log(head - total) + a * lx


@njit
def log_gamma_upper(a, x):
    """log Gamma(a, x) for real a and x > 0.

    a > 0: series (x < a + 1) or continued fraction.  a <= 0: continued
    fraction for x >= 1, otherwise lift the parameter into (0, 1] (or to 0,
    where Gamma(0, x) = E1(x)) and walk back down with
    Gamma(a, x) = (Gamma(a + 1, x) - x**a e**-x) / a.
    """
    if not x > 0.0:
        return math.nan
    if a > 0.0:
        if a < 0.05:
            # Gamma(a) - gamma(a, x) cancels badly as a -> 0
            return log_near_int_small_x(0, a, x) if x < 1.0 else log_upper_cf(a, x)
        if x < a + 1.0:
            lg = math.lgamma(a)
            frac = math.exp(log_lower_series(a, x) - lg)
            return lg + math.log1p(-frac)
        return log_upper_cf(a, x)
    if x >= 1.0:
        return log_upper_cf(a, x)
    m = int(round(-a))
    eps = a + m
    if 1e-14 <= abs(eps) < 0.05:
        return log_near_int_small_x(m, eps, x)
    # walk Gamma(cur, x) x^-cur downward: V <- (x V - e^-x) / cur
    fl = math.floor(a)
    a0 = a - fl
    lx = math.log(x)
    if a0 < 1e-14 or a0 > 1.0 - 1e-14:
        cur = 0.0
        steps = int(round(-a))
        val = exp1_small(x)
    else:
        cur = a0
        steps = int(-fl)
        lg = math.lgamma(a0)
        val = math.exp(lg - a0 * lx) * (1.0 - math.exp(log_lower_series(a0, x) - lg))
    ex = math.exp(-x)
    for _ in range(steps):
        cur -= 1.0
        val = (x * val - ex) / cur
    return math.log(val) + cur * lx


@njit
def log_gamma_lower(a, x):
    """log of the lower incomplete gamma for a > 0, x > 0."""
    if x < a + 1.0:
        return log_lower_series(a, x)
    lg = math.lgamma(a)
    return lg + math.log1p(-math.exp(log_upper_cf(a, x) - lg))


@njit
def log_kernel_k(t, alpha, p):
    """log k(t), k(t) = int_t^inf s^(-alpha-1) exp(-s^p) ds = Gamma(-alpha/p, t^p)/p."""
    if t <= 0.0:
        if alpha >= 0.0:
            return math.inf
        return math.lgamma(-alpha / p) - math.log(p)
    lx = p * math.log(t)
    if lx > 700.0:
        return -math.inf
    if lx < -690.0:
        return log_kernel_k_small(math.log(t), alpha, p)
    return log_gamma_upper(-alpha / p, math.exp(lx)) - math.log(p)


@njit
def log_kernel_k_small(ls, alpha, p):
    """log k(s) from its expansion at s -> 0, for s^p below the float range."""
    if alpha > 0.0:
        la = -alpha * ls - math.log(alpha)
        b = math.gamma(-alpha / p) / p
        return la + math.log1p(b * math.exp(-la))
    if alpha == 0.0:
        return math.log((-EULER_GAMMA - p * ls) / p)
    k0 = math.exp(math.lgamma(-alpha / p) - math.log(p))
    return math.log(k0 - math.exp(-alpha * ls) / -alpha)


@njit
def dlogk_dlogt(v, lk, alpha, p):
    """d log k / d log t at t = exp(v) given lk = log k(t)."""
    return -math.exp(-alpha * v - math.exp(p * v) - lk)


@njit
def log_pareto_tail(v, alpha, p, r0, rho, c):
    """log of the radial Levy tail generated by a Pareto Rosinski profile.

    Closed form, r = exp(v):
    c r0^-rho k(r/r0) + c r^-rho gamma((rho - alpha)/p, (r/r0)^p) / p,
    reducing to c r^-rho Gamma((rho - alpha)/p) / p when r0 = 0.
    Returns (log tail, log of the second term).
    """
    ap = (rho - alpha) / p
    lc = math.log(c)
    if r0 <= 0.0:
        t2 = lc - rho * v + math.lgamma(ap) - math.log(p)
        return t2, t2
    x = math.exp(p * (v - math.log(r0)))
    t2 = lc - rho * v + log_gamma_lower(ap, x) - math.log(p)
    t1 = lc - rho * math.log(r0) + log_kernel_k(math.exp(v) / r0, alpha, p)
    hi = max(t1, t2)
    return hi + math.log(math.exp(t1 - hi) + math.exp(t2 - hi)), t2


@njit
def _bracket(tab_y, y):
    """Index i with tab_y[i] >= y > tab_y[i + 1] for a decreasing table."""
    lo = 0
    hi = tab_y.shape[0] - 1
    if y >= tab_y[0]:
        return 0
    if y <= tab_y[hi]:
        return hi - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tab_y[mid] >= y:
            lo = mid
        else:
            hi = mid
    return lo


@njit
def hermite_start(y, v0, v1, y0, y1, d0, d1):
    """Cubic Hermite interpolation of the inverse map y -> v on one table cell,
    with end slopes dv/dy = 1/d."""
    h = y1 - y0
    s = (y - y0) / h
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * h / d0
            + (3 * s2 - 2 * s3) * v1 + (s3 - s2) * h / d1)


@njit
def _newton(ly, v, vlo, vhi, kind, alpha, p, r0, rho, c):
    """Safeguarded Newton on the log tail; kind 0 is k, kind 1 a Pareto tail.

    Stops once a step is below 1e-7: quadratic convergence then leaves an
    error far below rounding."""
    for _ in range(60):
        if kind == 0:
            lt = log_kernel_k(math.exp(v), alpha, p)
            dg = dlogk_dlogt(v, lt, alpha, p)
        else:
            lt, l2 = log_pareto_tail(v, alpha, p, r0, rho, c)
            dg = -rho * math.exp(l2 - lt)
        g = lt - ly
        if g > 0.0:
            vlo = v
        else:
            vhi = v
        if abs(g) < 1e-13:
            return v
        vn = v - g / dg if dg < 0.0 else 0.5 * (vlo + vhi)
        if not (vlo < vn < vhi):
            vn = 0.5 * (vlo + vhi)
        if abs(vn - v) < 1e-7:
            return vn
        v = vn
    return v


@njit
def _log_tail(v, kind, alpha, p, r0, rho, c):
    if kind == 0:
        return log_kernel_k(math.exp(v), alpha, p)
    lt, _ = log_pareto_tail(v, alpha, p, r0, rho, c)
    return lt


@njit
def invert_tail(ly, kind, alpha, p, r0, rho, c, tab_v, tab_y, tab_d):
    """Solve log T(exp(v)) = ly, T = k (kind 0) or a Pareto tail (kind 1),
    starting from the tabulated inverse."""
    i = _bracket(tab_y, ly)
    if ly >= tab_y[0]:
        return tab_v[0]
    if ly < tab_y[i + 1]:
        # beyond the table: widen the bracket upward
        vlo = tab_v[i + 1]
        step = 1.0
        while True:
            vhi = vlo + step
            if _log_tail(vhi, kind, alpha, p, r0, rho, c) < ly:
                break
            vlo = vhi
            step *= 2.0
        return _newton(ly, 0.5 * (vlo + vhi), vlo, vhi, kind, alpha, p, r0, rho, c)
    vlo = tab_v[i]
    vhi = tab_v[i + 1]
    v = hermite_start(ly, vlo, vhi, tab_y[i], tab_y[i + 1], tab_d[i], tab_d[i + 1])
    if not (vlo <= v <= vhi):
        v = 0.5 * (vlo + vhi)
    return _newton(ly, v, vlo, vhi, kind, alpha, p, r0, rho, c)


# ---------------------------------------------------------------------------
# array loops


@njit
def log_gamma_upper_arr(a, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = log_gamma_upper(a, x[i])
    return out


@njit
def log_kernel_k_arr(t, alpha, p):
    out = np.empty(t.shape[0])
    for i in range(t.shape[0]):
        out[i] = log_kernel_k(t[i], alpha, p)
    return out


@njit
def log_gamma_lower_arr(a, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = log_gamma_lower(a, x[i])
    return out


@njit
def draw_radii(u_comp, u_rad, cum_mass, kind, lscale, lmass0, par, tab_row,
               k_tab, p_tab, alpha, p):
    """Map uniform pairs to (component index, jump radius).

    kind 0 = point node at radius exp(lscale): radius = t * node with
    k(t) = U k(eps / node).  kind 1 = Pareto profile, inverted on its
    closed-form tail.  ``lmass0`` holds the log tail at eps per component.
    ``k_tab`` is a (3, m) table of (log t, log k, d log k / d log t) and
    ``p_tab`` the same per Pareto component, shape (rows, 3, m).
    """
    n = u_comp.shape[0]
    total = cum_mass[cum_mass.shape[0] - 1]
    comp = np.empty(n, dtype=np.int64)
    radius = np.empty(n)
    for j in range(n):
        target = u_comp[j] * total
        ci = np.searchsorted(cum_mass, target, side="right")
        if ci >= cum_mass.shape[0]:
            ci = cum_mass.shape[0] - 1
        comp[j] = ci
        ly = math.log(u_rad[j]) + lmass0[ci]
        if kind[ci] == 0:
            v = invert_tail(ly, 0, alpha, p, 0.0, 1.0, 1.0, k_tab[0], k_tab[1], k_tab[2])
            radius[j] = math.exp(v + lscale[ci])
        else:
            t = p_tab[tab_row[ci]]
            v = invert_tail(ly, 1, alpha, p, par[ci, 0], par[ci, 1], par[ci, 2],
                            t[0], t[1], t[2])
            radius[j] = math.exp(v)
    return comp, radius


@njit
def segment_sum(counts, values):
    """Sum consecutive row blocks of ``values`` of sizes ``counts``."""
    n = counts.shape[0]
    d = values.shape[1]
    out = np.zeros((n, d))
    pos = 0
    for i in range(n):
        for _ in range(counts[i]):
            for k in range(d):
                out[i, k] += values[pos, k]
            pos += 1
    return out


@njit
def ecf(x, z):
    """Empirical characteristic function of rows of x at rows of z."""
    n = x.shape[0]
    m = z.shape[0]
    d = x.shape[1]
    re = np.zeros(m)
    im = np.zeros(m)
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(d):
                s += z[j, k] * x[i, k]
            re[j] += math.cos(s)
            im[j] += math.sin(s)
    out = np.empty(m, dtype=np.complex128)
    for j in range(m):
        out[j] = complex(re[j] / n, im[j] / n)
    return out
