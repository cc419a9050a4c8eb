import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from ptstable import (Atom, DomainError, Grid, InvalidMeasureError, NotProperError, Pareto,
                      RosinskiMeasure, TSParams, from_spectral, is_proper, tempering_function,
                      to_spectral, validate)

ALPHAS = [-1.0, -0.3, 0.0, 0.5, 1.5]
RHOS = [0.3, 0.5, 1.5, 2.0, 2.5]


def analytic_valid(alpha, r0, rho):
    """Divergence rule for a Pareto profile: the far integral diverges iff
    rho <= max(alpha, 0) (for alpha = 0 the log integrand still converges
    for every rho > 0); with r0 = 0 the near integral diverges iff rho >= 2."""
    far_ok = rho > max(alpha, 0.0) or alpha <= 0
    near_ok = r0 > 0 or rho < 2
    return far_ok and near_ok


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("rho", RHOS)
@pytest.mark.parametrize("r0", [0.0, 1.0])
def test_pareto_validity_dichotomy(alpha, rho, r0):
    R = RosinskiMeasure(1, [((1.0,), Pareto(r0, rho, 1.0))])
    assert validate(alpha, R).valid == analytic_valid(alpha, r0, rho)


@pytest.mark.parametrize("alpha,rho,r0", [(0.5, 1.5, 1.0), (0.0, 0.5, 2.0), (-1.0, 0.5, 0.5),
                                          (1.5, 1.8, 0.0), (0.0, 1.0, 0.0)])
def test_validation_integrals_match_quadrature(alpha, rho, r0):
    prof = Pareto(r0, rho, 1.3)
    rep = validate(alpha, RosinskiMeasure(1, [((1.0,), prof)]))
    dens = lambda r: 1.3 * rho * r ** (-rho - 1)
    h = (lambda r: r ** alpha) if alpha > 0 else (
        (lambda r: 1 + math.log(r)) if alpha == 0 else (lambda r: 1.0))
    near = integrate.quad(lambda r: r * r * dens(r), r0, 1)[0] if r0 < 1 else 0.0
    far = integrate.quad(lambda r: h(r) * dens(r), max(r0, 1.0), np.inf, epsrel=1e-12)[0]
    vals = list(rep.integrals.values())
    assert vals[0] == pytest.approx(near, rel=1e-9)
    assert vals[1] == pytest.approx(far, rel=1e-9)


def test_named_violations():
    R = RosinskiMeasure(1, [((1.0,), Pareto(1.0, 0.4, 1.0))])
    assert validate(0.5, R).violations == ("tail-alpha-integral",)
    R0 = RosinskiMeasure(1, [((1.0,), Pareto(0.0, 2.5, 1.0))])
    assert "near-origin-square-integral" in validate(0.5, R0).violations
    assert validate(2.0, R).violations == ("alpha-range",)
    with pytest.raises(InvalidMeasureError):
        TSParams(0.5, 1.0, 0, R)


def test_atoms_and_grids_always_valid():
    assert validate(1.9, RosinskiMeasure.atom([3.0, -4.0], 2.0)).valid
    g = Grid((0.1, 1.0, 10.0), (1.0, 2.0, 0.5))
    assert validate(-2.0, RosinskiMeasure(1, [((1.0,), g)])).valid


def test_proper_is_alpha_moment():
    assert is_proper(0.5, RosinskiMeasure.atom(1.0))
    assert is_proper(0.5, RosinskiMeasure(1, [((1.0,), Pareto(1.0, 1.5, 1.0))])) is True
    # a pure power law charges the origin too heavily for any alpha-moment
    assert is_proper(0.5, RosinskiMeasure(1, [((1.0,), Pareto(0.0, 1.5, 1.0))])) is False
    # rho = alpha: valid only because the profile starts away from zero
    R = RosinskiMeasure(1, [((1.0,), Pareto(0.0, 0.5, 1.0))])
    assert not validate(0.5, R).valid
    R = RosinskiMeasure(1, [((1.0,), Pareto(0.0, 1.0, 1.0))])
    assert is_proper(-0.5, R) is False  # int r^-1/2 r^-2 dr diverges at 0


def test_constructors_reject_bad_input():
    with pytest.raises(DomainError):
        Atom(0.0, 1.0)
    with pytest.raises(DomainError):
        Pareto(1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        Grid((1.0, 0.5), (1.0, 1.0))
    with pytest.raises(DomainError):
        RosinskiMeasure(1, [((0.6,), Atom(1.0, 1.0))])
    with pytest.raises(DomainError):
        RosinskiMeasure.atom([0.0, 0.0])
    with pytest.raises(DomainError):
        TSParams(0.5, 1.0, (0.0, 0.0), RosinskiMeasure.atom(1.0))


def test_grid_default_weights_are_trapezoid():
    g = Grid((1.0, 2.0, 4.0), (1.0, 1.0, 1.0))
    r, w = g.nodes()
    np.testing.assert_allclose(w, [0.5, 1.5, 1.0])
    assert g.mass == pytest.approx(3.0)


profiles = st.one_of(
    st.builds(Atom, st.floats(0.01, 100), st.floats(0.01, 10)),
    st.builds(Pareto, st.floats(0.01, 10), st.floats(1.6, 5), st.floats(0.01, 10)),
)


@settings(max_examples=50, deadline=None)
@given(prof=profiles, sign=st.sampled_from([1.0, -1.0]), alpha=st.floats(-2, 1.5))
def test_json_round_trip(prof, sign, alpha):
    P = TSParams(alpha, 1.5, [0.25], RosinskiMeasure(1, [((sign,), prof)]))
    text = json.dumps(P.to_dict())
    assert TSParams.from_dict(json.loads(text)) == P


def test_spectral_round_trip_atom_and_pareto():
    R = RosinskiMeasure(2, [((1.0, 0.0), Atom(2.0, 0.7)),
                            ((0.0, -1.0), Pareto(0.5, 2.5, 1.2))])
    P = TSParams(0.5, 1.5, 0, R)
    S = to_spectral(P)
    back = from_spectral(S, 0.5, 1.5)
    for a, b in zip(R.rays, back.rays):
        assert a.direction == b.direction
        for f in ("r0", "w", "rho", "c"):
            if hasattr(a.profile, f):
                assert getattr(b.profile, f) == pytest.approx(getattr(a.profile, f), rel=1e-13)


def test_tempering_function_limits():
    P = TSParams(0.5, 1.0, 0, RosinskiMeasure.atom(2.0))
    S = to_spectral(P)
    # single atom: q(r^p) = exp(-r^p / r0^p)
    for r in (1e-6, 0.5, 3.0):
        assert tempering_function(S, r, (1.0,)) == pytest.approx(math.exp(-r / 2.0), rel=1e-13)
    with pytest.raises(DomainError):
        tempering_function(S, 1.0, (-1.0,))


def test_improper_has_no_spectral_form():
    P = TSParams(0.5, 1.0, 0, RosinskiMeasure(1, [((1.0,), Pareto(0.0, 0.5 + 1e-9, 1.0))]),
                 check=False)
    with pytest.raises((NotProperError, InvalidMeasureError)):
        to_spectral(P)
