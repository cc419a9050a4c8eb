"""Characteristic exponent of TS^p_alpha(R, b) and cumulants by numerical
differentiation.

Along a ray u the Levy integral reduces to one radial integral against the
density m of M on that ray,

    int_0^inf (e^(i w r) - 1 - i w r / (1 + r^2)) m(r) dr,   w = <z, u>,

split at r = 1/|w|.  Below the split the real part is written as
-2 sin^2(w r / 2) and the imaginary part as (sin x - x) + w r^3 / (1 + r^2),
which keeps small-r cancellation out.  Above it the oscillatory pieces go to
QUADPACK's Fourier-integral routine and the rest is non-oscillatory.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .errors import DomainError, MomentInfiniteError
from .levy import _check, log_ray_density, ray_tail
from .measure import Pareto, TSParams
from .moments import _multi_index, moment_finite
from .quadrature import QuadTol, quad

CF_TOL = QuadTol(epsabs=0.0, epsrel=1e-12, limit=800)


def _sin_minus_x(x: float) -> float:
    if abs(x) < 1e-2:
        x2 = x * x
        return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    return math.sin(x) - x


def _ray_exponent(alpha: float, p: float, prof, w: float, tol: QuadTol) -> complex:
    if w == 0.0:
        return 0.0j
    lm = lambda v: log_ray_density(alpha, p, prof, v)
    c = 1.0 / abs(w)
    lc = math.log(c)

    # [0, c] in log r
    def re_low(v):
        r = math.exp(v)
        s = math.sin(0.5 * w * r)
        if s == 0.0:
            return 0.0
        return -math.exp(math.log(2.0 * s * s) + lm(v) + v)

    def im_low(v):
        r = math.exp(v)
        l = lm(v)
        if l == -math.inf:
            return 0.0
        a = _sin_minus_x(w * r)
        head = 0.0 if a == 0.0 else math.copysign(math.exp(math.log(abs(a)) + l + v), a)
        tail = w * math.exp(3 * v - math.log1p(r * r) + l + v)
        return head + tail

    # near 0 the integrands grow like r^(2 - a) in log r, a the local index of m
    a = max(alpha, prof.rho) if isinstance(prof, Pareto) and prof.r0 == 0 else alpha
    lo_v = lc - 45.0 / (2.0 - a)
    re = quad(re_low, lo_v, lc, tol)
    im = quad(im_low, lo_v, lc, tol)

    # [c, inf): oscillatory parts with sine/cosine weights, the first few
    # periods on a finite interval and the rest by the Fourier-integral rule
    m = lambda r: math.exp(lm(math.log(r))) if r > 0 else 0.0
    # the Fourier rule works to an absolute tolerance only; a fixed tiny one
    # trips its roundoff detection, so scale it to the integrand
    b = c + 8.0 * math.pi / abs(w)
    ftol = QuadTol(epsabs=max(1e-14 * m(c) * c, 1e-300), epsrel=tol.epsrel, limit=tol.limit)
    near_tol = QuadTol(epsabs=0.0, epsrel=tol.epsrel, limit=tol.limit)
    osc = {}
    for kind in ("cos", "sin"):
        osc[kind] = (quad(m, c, b, near_tol, weight=kind, wvar=abs(w))
                     + quad(m, b, math.inf, ftol, weight=kind, wvar=abs(w)))
    re += osc["cos"] - ray_tail(alpha, p, prof, c, exact_pareto=True)
    s = osc["sin"]
    comp = quad(lambda v: math.exp(2 * v - math.log1p(math.exp(2 * v)) + lm(v)) if v < 350
                else math.exp(lm(v)), lc, math.inf, tol)
    im += math.copysign(s, w) - w * comp
    return complex(re, im)


def evaluate(params: TSParams, z, tol: QuadTol = CF_TOL) -> complex:
    """Characteristic exponent C(z) with E e^(i<z, X>) = exp(C(z)), centering
    function x / (1 + |x|^2) and no Gaussian part."""
    _check(params)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (params.dim,):
        raise DomainError(f"z must have dimension {params.dim}")
    total = 1j * float(np.dot(params.b, z))
    for ray in params.R.rays:
        w = float(np.dot(ray.direction, z))
        total += _ray_exponent(params.alpha, params.p, ray.profile, w, tol)
    return complex(total)


def evaluate_grid(params: TSParams, zs, tol: QuadTol = CF_TOL) -> np.ndarray:
    """:func:`evaluate` at each row (or scalar, when dim = 1) of ``zs``."""
    zs = np.asarray(zs, dtype=float).reshape(-1, params.dim)
    return np.array([evaluate(params, z, tol) for z in zs])


# ---------------------------------------------------------------------------
# cumulants from derivatives at the origin


def _central_stencil(order: int):
    """Offsets and weights of the shortest central O(h^2) stencil."""
    if order == 0:
        return [0], [Fraction(1)]
    half = (order + 1) // 2
    offs = list(range(-half, half + 1))
    n = len(offs)
    # solve sum_j w_j j^m / m! = delta_{m, order} exactly in rationals
    A = [[Fraction(j) ** m / math.factorial(m) for j in offs] for m in range(n)]
    b = [Fraction(int(m == order)) for m in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        b[col], b[piv] = b[piv], b[col]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col] / A[col][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
                b[r] -= f * b[col]
    return offs, [b[i] / A[i][i] for i in range(n)]


def _fd_derivative(fun, k, h: float) -> complex:
    stencils = [_central_stencil(kj) for kj in k]
    total = 0.0j
    for combo in itertools.product(*[list(zip(o, w)) for o, w in stencils]):
        wt = 1.0
        for _, wj in combo:
            wt *= float(wj)
        if wt == 0.0:
            continue
        total += wt * fun(np.array([o * h for o, _ in combo], dtype=float))
    return total / h ** sum(k)


def default_step(order: int) -> float:
    """h = 1e-3 up to order 2; larger steps for higher orders, where rounding
    in C would otherwise swamp the difference quotient."""
    return 1e-3 if order <= 2 else 10.0 ** (-12.0 / (order + 2))


def cumulant_from_cf(params: TSParams, k, h: float = None, tol: QuadTol = CF_TOL) -> float:
    """c_k = (-i)^|k| d^k C(0) by central differences at steps h, h/2, h/4
    combined by Richardson extrapolation (error O(h^6)).

    The extrapolation assumes C is smooth enough at 0, i.e. moments a few
    orders beyond |k| exist.  For a Pareto ray with index rho close to |k|
    the error is only O(h^(rho - |k|)) up to logs: about 1e-4 relative for the
    second cumulant when rho = 3.
    """
    k = _multi_index(params, k)
    q = sum(k)
    if q == 0:
        raise DomainError("cumulants need order >= 1")
    if not moment_finite(params, k=k):
        raise MomentInfiniteError(f"moment of order {k} is infinite")
    h = default_step(q) if h is None else h
    fun = lambda z: evaluate(params, z, tol)
    d = [_fd_derivative(fun, k, h / 2 ** j) for j in range(3)]
    r1 = [(4 * d[j + 1] - d[j]) / 3 for j in range(2)]
    best = (16 * r1[1] - r1[0]) / 15
    return float(((-1j) ** q * best).real)
