import math

import numpy as np
import pytest
from scipy import integrate, special

from ptstable import Atom, DomainError, Grid, Pareto, RosinskiMeasure, TSParams, levy

DELTA1 = TSParams(0.5, 1.0, 0, RosinskiMeasure.atom(1.0))


def direct_tail_atom(alpha, p, r0, w, r):
    """w * int_{r/r0}^inf t^(-alpha-1) e^(-t^p) dt by plain quadrature."""
    f = lambda t: t ** (-alpha - 1) * math.exp(-t ** p)
    a = r / r0
    return w * sum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
                   for lo, hi in [(a, max(a, 1) * 4), (max(a, 1) * 4, np.inf)])


def direct_tail_pareto(alpha, p, prof, r):
    def inner(rr):
        return direct_tail_atom(alpha, p, rr, 1.0, r)
    dens = lambda rr: prof.c * prof.rho * rr ** (-prof.rho - 1)
    lo = prof.r0 if prof.r0 > 0 else r * 1e-6
    total = 0.0
    for a, b in [(lo, max(r, lo) * 2), (max(r, lo) * 2, np.inf)]:
        total += integrate.quad(lambda rr: inner(rr) * dens(rr), a, b, epsabs=0,
                                epsrel=1e-10, limit=200)[0]
    return total


@pytest.mark.parametrize("alpha,p", [(0.5, 1.0), (-1.0, 2.0), (1.5, 0.5), (0.0, 1.0)])
def test_atom_tail_matches_direct_integral(alpha, p):
    P = TSParams(alpha, p, 0, RosinskiMeasure(1, [((1.0,), Atom(2.0, 0.7)),
                                                  ((-1.0,), Atom(0.5, 1.3))]))
    for r in (0.05, 0.5, 2.0, 6.0):
        ref = direct_tail_atom(alpha, p, 2.0, 0.7, r) + direct_tail_atom(alpha, p, 0.5, 1.3, r)
        assert levy.tail(P, r) == pytest.approx(ref, rel=1e-9)
        assert levy.tail(P, r, cone=[1]) == pytest.approx(
            direct_tail_atom(alpha, p, 0.5, 1.3, r), rel=1e-9)


@pytest.mark.parametrize("alpha,p,prof", [
    (0.5, 1.0, Pareto(1.0, 3.0, 1.0)),
    (0.5, 1.0, Pareto(0.0, 1.5, 1.0)),
    (-0.5, 2.0, Pareto(0.3, 1.2, 2.0)),
    (1.2, 1.5, Pareto(0.0, 1.9, 0.5)),
])
def test_pareto_tail_quadrature_and_closed_form(alpha, p, prof):
    P = TSParams(alpha, p, 0, RosinskiMeasure(1, [((1.0,), prof)]))
    r = np.array([0.3, 1.0, 4.0, 40.0])
    quad_vals = levy.tail(P, r)
    closed = levy.tail_closed(P, r)
    np.testing.assert_allclose(quad_vals, closed, rtol=1e-9)
    ref = direct_tail_pareto(alpha, p, prof, 1.0)
    assert quad_vals[1] == pytest.approx(ref, rel=1e-7)


def test_grid_tail_is_node_sum():
    g = Grid((0.5, 1.0, 3.0), (1.0, 1.0, 1.0), (0.2, 0.3, 0.5))
    P = TSParams(0.7, 1.3, 0, RosinskiMeasure(1, [((1.0,), g)]))
    ref = sum(w * direct_tail_atom(0.7, 1.3, r0, 1.0, 0.8) for r0, w in zip(g.rs, g.weights))
    assert levy.tail(P, 0.8) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("prof", [Atom(1.5, 2.0), Pareto(0.7, 2.2, 1.0)])
def test_spectral_route_agrees(prof):
    P = TSParams(0.5, 1.5, 0, RosinskiMeasure(1, [((1.0,), prof)]))
    for r in (0.2, 1.0, 5.0):
        assert levy.tail_spectral(P, r) == pytest.approx(levy.tail(P, r), rel=1e-8)


def test_tail_is_decreasing_and_density_is_its_derivative():
    P = TSParams(0.5, 1.0, 0, RosinskiMeasure(1, [((1.0,), Pareto(1.0, 3.0, 1.0))]))
    r = np.geomspace(0.01, 100, 60)
    t = levy.tail(P, r)
    assert np.all(np.diff(t) < 0)
    prof = P.R.rays[0].profile
    for x in (0.3, 2.0, 10.0):
        h = 1e-5 * x
        fd = -(levy.tail(P, x + h) - levy.tail(P, x - h)) / (2 * h)
        assert float(levy.ray_density(0.5, 1.0, prof, x)) == pytest.approx(fd, rel=1e-6)


def test_scaled_tail_limit_for_unit_atom():
    lim = levy.scaled_tail_limits(DELTA1)
    assert lim.limit_at_zero == pytest.approx(2.0)
    assert lim.limit_at_inf == 0.0
    s = np.geomspace(1e-4, 1e2, 50)
    vals = levy.scaled_tail(DELTA1, s)
    # exact: s^(1/2) Gamma(-1/2, s) = 2 e^-s - 2 sqrt(pi s) erfc(sqrt s)
    exact = 2 * np.exp(-s) - 2 * np.sqrt(np.pi * s) * special.erfc(np.sqrt(s))
    np.testing.assert_allclose(vals, exact, rtol=1e-12)
    assert np.all(np.diff(vals) <= 0)
    assert abs(levy.scaled_tail(DELTA1, 1e-9) - 2.0) < 1e-3


def test_scaled_tail_limit_negative_alpha_is_infinite():
    P = TSParams(-0.5, 1.0, 0, RosinskiMeasure.atom(1.0))
    assert levy.scaled_tail_limits(P).limit_at_zero == math.inf


def test_ball_mass():
    assert levy.ball_mass(DELTA1, 1.0) == math.inf
    P = TSParams(-1.0, 1.0, 0, RosinskiMeasure.atom(2.0, 3.0))
    # M(|x| < s) = 3 * int_0^{s/2} e^-t dt
    assert levy.ball_mass(P, 1.0) == pytest.approx(3 * (1 - math.exp(-0.5)), rel=1e-12)
    total = 3 * math.gamma(1.0)
    assert levy.ball_mass(P, 1.0) + levy.tail(P, 1.0) == pytest.approx(total, rel=1e-12)


def test_selfdecomposable_verdicts():
    assert levy.is_selfdecomposable(DELTA1) is True
    assert levy.is_selfdecomposable(TSParams(-0.5, 1.0, 0, RosinskiMeasure.atom(1.0))) is None


def test_tail_rejects_nonpositive_radius():
    with pytest.raises(DomainError):
        levy.tail(DELTA1, 0.0)


def test_tail_function_callable():
    f = levy.TailFunction(DELTA1)
    assert f(1.0) == pytest.approx(levy.tail(DELTA1, 1.0))
