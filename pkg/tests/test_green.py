import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmelab import (DomainError, ManifoldProfile, NotNonparabolicError, RangeError, ball_green,
                    green_ball, green_radial, level_radius, whole_green)
from pmelab.green import green_upper_bound_check


H3 = ManifoldProfile.hyperbolic(3)
EXP1 = ManifoldProfile.exponential_power(3, 1.0)


def coth_minus_one(r):
    return 2.0 / np.expm1(2.0 * np.asarray(r, dtype=float))


def test_closed_forms(e3, h3):
    r = np.geomspace(1e-3, 30.0, 40)
    assert np.allclose(green_radial(e3, r), 1 / (4 * math.pi * r), rtol=1e-12, atol=0)
    assert np.allclose(green_radial(h3, r), coth_minus_one(r) / (4 * math.pi), rtol=1e-12, atol=0)


def test_far_field_vanishes(h3, e3):
    assert green_radial(h3, 200.0) < 1e-150
    assert green_radial(e3, 1e5) == pytest.approx(1 / (4 * math.pi * 1e5), rel=1e-12)


def test_higher_dimension_closed_form():
    # R^4: g = r^-2 / (2 omega_4) with omega_4 = 2 pi^2
    p = ManifoldProfile.euclidean(4)
    r = np.array([0.1, 1.0, 7.0])
    assert np.allclose(green_radial(p, r), r**-2 / (4 * math.pi**2), rtol=1e-12)


def test_parabolic_manifold_raises(e2):
    with pytest.raises(NotNonparabolicError, match="parabolic"):
        green_radial(e2, 1.0)
    # balls are fine: G_R = log(R/r) / (2 pi)
    assert green_ball(e2, 3.0, 1.0) == pytest.approx(math.log(3.0) / (2 * math.pi), rel=1e-12)


def test_domain_errors(e3):
    with pytest.raises(DomainError):
        green_radial(e3, 0.0)
    with pytest.raises(DomainError):
        green_ball(e3, 2.0, 2.5)


def test_ball_green(e3, h3):
    assert green_ball(e3, 2.0, 1.0) == pytest.approx(1 / (8 * math.pi), rel=1e-12)
    assert green_ball(e3, 2.0, 2.0) == 0.0
    diff = green_ball(h3, 10.0, 1.0) - green_radial(h3, 1.0)
    # G_R - G = -g(R) = -(coth 10 - 1) / (4 pi)
    assert diff == pytest.approx(-coth_minus_one(10.0) / (4 * math.pi), rel=1e-6)


@given(R1=st.floats(0.5, 12.0), R2=st.floats(0.5, 12.0), r=st.floats(0.01, 0.49))
def test_ball_green_increases_to_whole(R1, R2, r):
    p = H3
    lo, hi = sorted((R1, R2))
    g_lo, g_hi, g = green_ball(p, lo, r), green_ball(p, hi, r), green_radial(p, r)
    assert g_lo <= g_hi * (1 + 1e-14) + 1e-300
    assert g_hi <= g * (1 + 1e-14)


def test_ball_green_limit(h3):
    r = np.geomspace(1e-2, 3.0, 30)
    gap = np.max(green_radial(h3, r) - ball_green(h3, 30.0)(r))
    # exact gap g(30) ~ 1e-27; what remains is rounding of values up to g(0.01) ~ 8
    assert 0 <= gap < 1e-14


@given(r=st.floats(0.01, 10.0))
def test_green_is_decreasing_and_harmonic(r):
    p = EXP1
    gp = whole_green(p)
    h = 1e-3 * r
    assert gp(r + h) < gp(r) < gp(r - h)
    # radial Laplacian psi^(1-N) (psi^(N-1) g')' by differences of the flux
    flux = lambda s: p.area_density(s) * gp.derivative(s)
    lap = (flux(r + h) - flux(r - h)) / (2 * h) / p.area_density(r)
    scale = abs(gp.derivative(r)) / r
    assert abs(lap) <= 1e-6 * scale


def test_flux_normalization_from_differences(h3):
    gp = whole_green(h3)
    r = np.geomspace(0.01, 8.0, 50)
    h = 1e-4 * r
    d1 = (gp(r + h) - gp(r - h)) / (2 * h)
    d2 = (gp(r + 2 * h) - gp(r - 2 * h)) / (4 * h)
    flux = h3.area_density(r) * np.abs((4 * d1 - d2) / 3)
    assert np.max(np.abs(flux - 1)) < 1e-8


def test_level_radius(e3, h3):
    assert level_radius(whole_green(e3), 1 / (4 * math.pi)) == pytest.approx(1.0, rel=1e-12)
    assert level_radius(whole_green(h3), coth_minus_one(2.0) / (4 * math.pi)) == pytest.approx(2.0, rel=1e-12)
    gb = ball_green(e3, 2.0)
    with pytest.raises(RangeError):
        level_radius(gb, -1.0)


@given(a=st.floats(1e-4, 1e4), b=st.floats(1e-4, 1e4))
def test_level_radius_monotone_and_inverse(a, b):
    gp = whole_green(H3)
    sa, sb = level_radius(gp, a), level_radius(gp, b)
    assert gp(sa) == pytest.approx(a, rel=1e-10)
    if a > b:
        assert sa < sb
    elif a < b:
        assert sa > sb


def test_upper_bound_check(e3, h3):
    samples = np.geomspace(0.01, 10.0, 30)
    rep = green_upper_bound_check(e3, samples)
    assert rep.passed and rep.details["max_ratio"] == pytest.approx(1.0, abs=1e-12)
    rep = green_upper_bound_check(h3, samples)
    assert rep.passed and rep.details["max_ratio"] < 1
    rep = green_upper_bound_check(ManifoldProfile.exponential_power(3, 1.0), samples)
    ratios = np.array(rep.details["ratios"])
    assert rep.passed and np.all(ratios < 1) and np.all(np.diff(ratios) < 0)
