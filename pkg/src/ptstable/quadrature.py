"""Adaptive quadrature helpers on top of QUADPACK (scipy.integrate.quad)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy import integrate


@dataclass(frozen=True)
class QuadTol:
    epsabs: float = 1e-12
    epsrel: float = 1e-10
    limit: int = 400


DEFAULT_TOL = QuadTol()


def quad(f, a, b, tol: QuadTol = DEFAULT_TOL, points=None, **kwargs) -> float:
    """Integrate ``f`` over [a, b]; ``points`` are interior breakpoints."""
    if a == b:
        return 0.0
    if points is not None:
        lo, hi = min(a, b), max(a, b)
        points = sorted(x for x in points if lo < x < hi) or None
        if math.isinf(a) or math.isinf(b):
            points = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(f, a, b, epsabs=tol.epsabs, epsrel=tol.epsrel,
                                limit=tol.limit, points=points, **kwargs)
    return val


def quad_log(f, lo, hi, tol: QuadTol = DEFAULT_TOL, points=None) -> float:
    """Integrate ``f(r) dr`` over (lo, hi) after the substitution r = e^v.

    ``lo`` may be 0 and ``hi`` may be inf; ``points`` are breakpoints in r.
    """
    vlo = -math.inf if lo <= 0 else math.log(lo)
    vhi = math.inf if math.isinf(hi) else math.log(hi)

    def g(v):
        # the far ends of an infinite range carry no mass for integrable f
        if v > 700.0 or v < -700.0:
            return 0.0
        r = math.exp(v)
        return f(r) * r

    cuts = sorted(math.log(x) for x in (points or ()) if lo < x < hi)
    edges = [vlo, *cuts, vhi]
    return sum(quad(g, edges[i], edges[i + 1], tol) for i in range(len(edges) - 1))


def quad_logexp(lf, lo, hi, tol: QuadTol = DEFAULT_TOL, points=None) -> float:
    """Integrate exp(lf(v)) dr over r in (lo, hi), where v = log r.

    The integrand is supplied as a log in terms of log r, so products of very
    large and very small factors stay finite and the range may be unbounded.
    """
    def g(v):
        val = lf(v) + v
        return math.exp(val) if val > -745.0 else 0.0

    vlo = -math.inf if lo <= 0 else math.log(lo)
    vhi = math.inf if math.isinf(hi) else math.log(hi)
    cuts = sorted(math.log(x) for x in (points or ()) if lo < x < hi)
    edges = [vlo, *cuts, vhi]
    return sum(quad(g, edges[i], edges[i + 1], tol) for i in range(len(edges) - 1))
