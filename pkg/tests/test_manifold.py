import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pmelab import (DomainError, InvalidProfileError, ManifoldProfile, RangeError, ball_volume,
                    check_hypothesis, ricci_radial, sectional_curvature, sphere_area)

radii = st.floats(min_value=0.05, max_value=8.0)
exponents = st.floats(min_value=0.1, max_value=2.0)


def test_sphere_areas():
    assert sphere_area(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2 * math.pi**2, rel=1e-15)


def test_curvatures_of_space_forms(e3, h3):
    assert sectional_curvature(e3, 1.0) == 0.0
    assert sectional_curvature(h3, 1.0) == pytest.approx(-1.0, rel=1e-14)
    assert ricci_radial(h3, 1.0) == pytest.approx(-2.0, rel=1e-14)
    assert ricci_radial(e3, 3.7) == 0.0


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_curvature_needs_positive_radius(h3, r):
    with pytest.raises(DomainError):
        sectional_curvature(h3, r)
    with pytest.raises(DomainError):
        ricci_radial(h3, r)


def test_ball_volumes(e3, h3):
    assert ball_volume(e3, 1.0) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    # int_0^1 sinh^2 = (sinh 1 cosh 1 - 1)/2 = sinh(2)/4 - 1/2
    assert ball_volume(h3, 1.0) == pytest.approx(4 * math.pi * (math.sinh(2) / 4 - 0.5), rel=1e-10)
    assert ball_volume(h3, 0.0) == 0.0
    with pytest.raises(DomainError):
        ball_volume(e3, -1.0)


@given(a=radii, b=radii)
def test_ball_volume_increasing(a, b):
    if a == b:
        return
    lo, hi = sorted((a, b))
    p = ManifoldProfile.hyperbolic(3)
    assert ball_volume(p, lo) < ball_volume(p, hi)


@given(R=radii, a=exponents)
def test_volume_lower_bound_on_cartan_hadamard(R, a):
    for p in (ManifoldProfile.hyperbolic(3), ManifoldProfile.exponential_power(3, a)):
        assert ball_volume(p, R) >= p.omega / p.N * R**p.N * (1 - 1e-12)
    e = ManifoldProfile.euclidean(3)
    assert ball_volume(e, R) == pytest.approx(e.omega / 3 * R**3, rel=1e-12)


@given(a=exponents, r=radii)
def test_exponential_power_is_cartan_hadamard(a, r):
    p = ManifoldProfile.exponential_power(3, a)
    assert p.d2psi(r) >= 0
    assert p.psi(r) > 0
    # m(rho) = (N-1) psi'/psi >= (N-1)/rho
    assert p.mean_curvature(r) >= 2.0 / r * (1 - 1e-12)


@given(a=exponents)
def test_exponential_power_class_A_and_far_field(a):
    p = ManifoldProfile.exponential_power(3, a)
    assert p.psi(0.0) == 0.0
    assert p.dpsi(0.0) == pytest.approx(1.0, abs=1e-12)
    assert p.psi(1e-7) / 1e-7 == pytest.approx(1.0, rel=1e-6)
    # for r >= 1, psi is a constant multiple of r exp(r^a)
    r = np.array([1.0, 1.5, 3.0, 5.0])
    shift = p.log_psi(r) - np.log(r) - r**a
    assert np.ptp(shift) < 1e-12


def _richardson(f, r, h):
    """Fourth-order centered first and second differences."""
    d1 = lambda k: (f(r + k) - f(r - k)) / (2 * k)
    d2 = lambda k: (f(r + k) - 2 * f(r) + f(r - k)) / k**2
    return (4 * d1(h / 2) - d1(h)) / 3, (4 * d2(h / 2) - d2(h)) / 3


@pytest.mark.parametrize("kind,arg", [("hyperbolic", None), ("exponential_power", 0.5),
                                      ("exponential_power", 2.0)])
@given(r=st.floats(min_value=0.1, max_value=4.0))
def test_derivatives_match_finite_differences(kind, arg, r):
    p = ManifoldProfile.hyperbolic(3) if arg is None else ManifoldProfile.exponential_power(3, arg)
    d1, d2 = _richardson(p.psi, r, 2e-3 * r)
    assert p.dpsi(r) == pytest.approx(d1, rel=1e-6)
    # second differences lose digits to cancellation; compare on the scale of psi
    assert abs(p.d2psi(r) - d2) <= 1e-6 * max(abs(d2), p.psi(r))
    assert sectional_curvature(p, r) == pytest.approx(-p.d2psi(r) / p.psi(r), rel=1e-12)


def test_exponential_power_ricci_bound_a2():
    p = ManifoldProfile.exponential_power(3, 2.0)
    r = np.linspace(0.05, 20.0, 400)
    C = float(np.max(-ricci_radial(p, r) / (1 + r**2)))
    assert math.isfinite(C)
    # psi''/psi -> 4 r^2 for large r, so the fitted constant approaches 2 (N - 1) = 4 from above
    assert 4.0 <= C < 20.0
    report = check_hypothesis(p, 20.0)
    assert report.is_cartan_hadamard and report.ricci_bounded and report.is_nonparabolic


def test_hypothesis_reports(e2, e3, h3):
    assert not check_hypothesis(e2, 10.0).is_nonparabolic
    rep = check_hypothesis(e3, 10.0)
    assert rep.is_nonparabolic and rep.ricci_bound_constant == 0.0 and rep.satisfies_H
    rep = check_hypothesis(h3, 10.0)
    assert rep.is_nonparabolic
    assert rep.ricci_bound_constant == pytest.approx(2.0, rel=1e-6)


def test_fast_curvature_growth_is_flagged_unbounded():
    # psi = r exp(r^a) with a = 2 has Ric ~ -r^2; a profile growing like exp(r^3) would not
    r = np.linspace(0.0, 6.0, 600)
    E = np.exp(r**3 / 3)
    sh, ch = np.sinh(r), np.cosh(r)
    psi = sh * E
    dpsi = (ch + r**2 * sh) * E
    d2psi = (sh + 2 * r * sh + 2 * r**2 * ch + r**4 * sh) * E
    report = check_hypothesis(ManifoldProfile.tabulated(3, r, psi, dpsi, d2psi), 6.0)
    assert math.isinf(report.ricci_bound_constant)
    assert not report.satisfies_H


def test_tabulated_profile_matches_source(sinh_table):
    r, psi = sinh_table
    p = ManifoldProfile.tabulated(3, r, psi)
    x = np.linspace(0.5, 5.5, 11)
    assert np.allclose(p.psi(x), np.sinh(x), rtol=1e-5)
    assert np.allclose(p.dpsi(x), np.cosh(x), rtol=1e-3)
    rep = check_hypothesis(p, 6.0)
    assert rep.heuristic and rep.is_nonparabolic
    assert any("model-only" in n for n in rep.notes)
    with pytest.raises(RangeError):
        p.psi(7.0)


def test_tabulated_profile_errors():
    r = np.linspace(0, 5, 20)
    with pytest.raises(InvalidProfileError):
        ManifoldProfile.tabulated(3, r, np.sin(r))
    with pytest.raises(InvalidProfileError):
        ManifoldProfile.tabulated(3, r[::-1], np.sinh(r[::-1]))
    with pytest.raises(InvalidProfileError):
        ManifoldProfile.tabulated(3, r, np.sinh(r) + 1.0)


def test_table_file_roundtrip(tmp_path, sinh_table):
    r, psi = sinh_table
    path = tmp_path / "psi.txt"
    np.savetxt(path, np.column_stack([r, psi, np.cosh(r)]))
    p = ManifoldProfile.from_table_file(path, 3)
    assert p.psi(2.0) == pytest.approx(math.sinh(2.0), rel=1e-9)
    assert p.dpsi(2.0) == pytest.approx(math.cosh(2.0), rel=1e-6)
