import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pmelab import (ConfigurationError, DomainError, ManifoldProfile, RadialField, RadialMeasure,
                    RangeError, audit_M_monotonicity, ball_green, mean_value_M, mean_value_M_coarea,
                    mean_value_m, potential, potential_at, potential_energy_identity, whole_green)

E3 = ManifoldProfile.euclidean(3)
H3 = ManifoldProfile.hyperbolic(3)
GE3 = whole_green(E3)
GH3 = whole_green(H3)
EDGES = np.concatenate([[0.0], np.geomspace(1e-4, 60.0, 1500)])


def newton_shell(r, a, b):
    """Potential of a unit-density shell a <= |y| <= b in R^3 (kernel 1/(4 pi |x - y|))."""
    r = np.asarray(r, dtype=float)
    inside = (b * b - a * a) / 2
    between = (b * b - r * r) / 2 + (r**3 - a**3) / (3 * r)
    outside = (b**3 - a**3) / (3 * r)
    return np.where(r <= a, inside, np.where(r >= b, outside, between))


def test_dirac_potential_is_green_function():
    field = potential(RadialMeasure.dirac(), GE3, EDGES)
    r = np.array([0.01, 0.3, 2.0])
    assert np.allclose(field(r), 1 / (4 * math.pi * r), rtol=1e-14)
    assert np.allclose(potential_at(RadialMeasure.dirac(), GE3, r), 1 / (4 * math.pi * r), rtol=1e-14)


def test_zero_measure():
    field = potential(RadialMeasure(), GE3, EDGES)
    assert not np.any(field.values) and field.pole_mass == 0


@pytest.mark.parametrize("a,b", [(0.0, 1.0), (1.0, 2.0), (0.3, 0.4)])
def test_shell_potential_closed_form(a, b):
    r = np.geomspace(0.05, 5.0, 37)
    got = potential_at(RadialMeasure.shell(a, b), GE3, r)
    assert np.allclose(got, newton_shell(r, a, b), rtol=1e-11)


def test_profile_mismatch_and_ball_support():
    mu = RadialMeasure.shell(1.0, 2.0, profile=H3)
    with pytest.raises(ConfigurationError):
        potential_at(mu, GE3, np.array([1.0]))
    with pytest.raises(ConfigurationError):
        potential_at(RadialMeasure.shell(1.0, 3.0), ball_green(E3, 2.0), np.array([1.0]))


def test_energy_identity_unit_ball():
    lhs, rhs = potential_energy_identity(RadialMeasure.shell(0.0, 1.0).density, GE3)
    assert lhs == pytest.approx(8 * math.pi / 15, rel=1e-10)
    assert rhs == pytest.approx(8 * math.pi / 15, rel=1e-10)


def test_energy_identity_gaussian_hyperbolic():
    f = RadialMeasure.from_function(lambda s: np.exp(-s**2), np.linspace(0, 5, 201), profile=H3).density
    lhs, rhs = potential_energy_identity(f, GH3)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_energy_identity_trivial_and_errors(e2):
    assert potential_energy_identity(RadialField([0.0, 1.0], [0.0]), GE3) == (0.0, 0.0)
    with pytest.raises(DomainError):
        potential_energy_identity(RadialField([0.0, 1.0], [-1.0]), GE3)


def test_m_of_elementary_functions():
    r = np.array([0.5, 2.0, 40.0])
    assert np.allclose(mean_value_m(lambda s: 3.0 + 0 * s, GE3, r), 3.0)
    assert np.allclose(mean_value_m(GE3, GE3, r), 1 / r, rtol=1e-12)
    # level set {1/(4 pi s) = 1/r} is the sphere s = r / (4 pi)
    assert np.allclose(mean_value_m(lambda s: s, GE3, r), r / (4 * math.pi), rtol=1e-12)
    with pytest.raises(RangeError):
        mean_value_m(GE3, GE3, 0.0)


def test_m_of_one_on_hyperbolic_field():
    one = RadialField(EDGES, np.ones(EDGES.size - 1))
    r = np.geomspace(0.1, 50.0, 20)
    assert np.allclose(mean_value_m(one, GH3, r), 1.0, atol=1e-10)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_m_is_linear(a, b):
    u = potential(RadialMeasure.shell(0.5, 1.0), GE3, EDGES)
    v = potential(RadialMeasure.shell(1.0, 2.5, 0.3), GE3, EDGES)
    r = np.geomspace(0.2, 20.0, 7)
    combo = u.scaled(a) + v.scaled(b)
    expected = a * mean_value_m(u, GE3, r) + b * mean_value_m(v, GE3, r)
    assert np.allclose(mean_value_m(combo, GE3, r), expected, rtol=1e-12, atol=1e-14)


def test_M_of_elementary_functions():
    r = np.array([0.3, 1.0, 10.0])
    assert np.allclose(mean_value_M(lambda s: 2.5 + 0 * s, GE3, r), 2.5, rtol=1e-12)
    for alpha in (1.0, 2.0, 0.5):
        assert np.allclose(mean_value_M(GE3, GE3, r, alpha), (alpha + 1) / alpha / r, rtol=1e-10)
    atom = potential(RadialMeasure.dirac(), GH3, EDGES)
    assert np.allclose(mean_value_M(atom, GH3, r), 2 / r, rtol=1e-12)


def test_M_divergence_is_flagged():
    # m_xi[g^2] = xi^-2, so int_0 xi^alpha xi^-2 diverges for alpha <= 1
    assert mean_value_M(lambda s: GE3(s) ** 2, GE3, 1.0, 1.0) == math.inf
    assert mean_value_M(lambda s: GE3(s) ** 2, GE3, 1.0, 1.5) == pytest.approx(5.0, rel=1e-10)


def test_M_routes_agree():
    u = potential(RadialMeasure.shell(0.5, 1.5), GH3, EDGES)
    for r in (0.5, 3.0, 30.0):
        assert mean_value_M(u, GH3, r) == pytest.approx(mean_value_M_coarea(u, GH3, r), rel=1e-9)


def test_audit_passes_for_green_and_shell_and_flags_growth():
    r = np.geomspace(0.1, 20.0, 30)
    assert audit_M_monotonicity(GE3, GE3, 1.0, r).passed
    shell = potential(RadialMeasure.shell(1.0, 2.0), GE3, EDGES)
    assert audit_M_monotonicity(shell, GE3, 1.0, r).passed
    rep = audit_M_monotonicity(lambda s: s, GE3, 1.0, r)
    assert not rep.passed and rep.max_error > 1e-3


def test_M_continuity_at_pole():
    u = potential(RadialMeasure.shell(1.0, 2.0), GH3, EDGES)
    r = np.array([1e-3, 2e-3, 3e-3])
    M = mean_value_M(u, GH3, r)
    at_zero = np.polyval(np.polyfit(r, M, 2), 0.0)
    assert at_zero == pytest.approx(u.regular(0.0), rel=1e-8)


shells = st.lists(st.tuples(st.floats(0.0, 3.0), st.floats(0.05, 1.0), st.floats(0.0, 5.0)),
                  min_size=1, max_size=3)


@settings(max_examples=15)
@given(pieces=shells, atom=st.floats(0.0, 2.0))
def test_potentials_of_nonnegative_measures_are_M_superharmonic(pieces, atom):
    edges = EDGES[::5]
    field = potential(RadialMeasure(atom, None, H3), GH3, edges)
    for inner, width, value in pieces:
        field = field + potential(RadialMeasure.shell(inner, inner + width, value, profile=H3), GH3, edges)
    r = np.geomspace(0.05, 30.0, 8)
    M = mean_value_M(field, GH3, r)
    assert np.all(np.diff(M) <= 1e-8 * max(1.0, np.max(np.abs(M))))
    # M_r[u] <= u at the pole (finite only without an atom)
    if atom == 0:
        assert np.all(M <= field.regular(0.0) * (1 + 1e-12) + 1e-14)


def test_field_range_checks():
    f = RadialField([0.0, 1.0, 2.0], [1.0, 2.0])
    assert f.regular(0.0) == 1.0 and f.regular(1.0) == pytest.approx(1.5)
    with pytest.raises(RangeError):
        f.regular(2.5)
