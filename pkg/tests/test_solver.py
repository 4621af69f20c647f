import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy import integrate

from pmelab import (ZKB, ConfigurationError, DomainError, InsufficientDataError, ManifoldProfile,
                    RadialField, RadialMeasure, SolverConfig, build_grid, ball_volume,
                    mollify_measure, potential_at, smoothing_exponent_fit, smoothing_exponents,
                    solve_ball, solve_cauchy, step_implicit, whole_green)
from pmelab.solver import _operator, integrate_field
from pmelab.verify import check_zkb_oracle

E3 = ManifoldProfile.euclidean(3)
H3 = ManifoldProfile.hyperbolic(3)
E2 = ManifoldProfile.euclidean(2)
CFG = SolverConfig(m=2.0)


def test_euclidean_grid_volume_is_exact():
    g = build_grid(E3, 1.0, 200, grading=1.01)
    assert g.volumes.sum() == pytest.approx(4 * math.pi / 3, rel=1e-12)
    assert g.edges[0] == 0 and g.edges[-1] == 1.0


def test_hyperbolic_grid_volume_and_areas():
    g = build_grid(H3, 6.0, 300)
    assert g.volumes.sum() == pytest.approx(ball_volume(H3, 6.0), rel=1e-10)
    assert g.areas[0] == 0 and np.all(np.diff(g.areas) > 0)


@pytest.mark.parametrize("grading", [0.0, -1.0])
def test_bad_grading(grading):
    with pytest.raises(DomainError):
        build_grid(E3, 1.0, 64, grading)


def test_step_fixed_points_and_boundary_loss():
    g = build_grid(E3, 2.0, 64)
    zero = step_implicit(RadialField(g.edges, np.zeros(g.M)), 0.1, CFG, g)
    assert not np.any(zero.values)
    # constant data: interior fluxes vanish, only the Dirichlet wall drains the last cell
    div, outflux = _operator(np.full(g.M, 2.0), g)
    assert not np.any(div[:-1])
    assert div[-1] == -outflux == pytest.approx(-2.0 * g.transmissibility[-1])


def test_zkb_solves_pme_symbolically():
    r, t, C = sp.symbols("r t C", positive=True)
    for N, m in [(3, sp.Integer(2)), (2, sp.Integer(3)), (4, sp.Rational(3, 2))]:
        alpha = sp.Integer(N) / ((m - 1) * N + 2)
        gamma = alpha / N
        k = (m - 1) * alpha / (2 * m * N)
        base = C - k * r**2 * t ** (-2 * gamma)
        u = t ** (-alpha) * base ** (1 / (m - 1))
        w = u**m
        lap = sp.diff(w, r, 2) + (N - 1) / r * sp.diff(w, r)
        residual = sp.diff(u, t) - lap
        # evaluate inside the support, where base > 0, at 40 digits
        for rv, tv in [(0.3, 0.5), (1.1, 2.0), (0.05, 7.0)]:
            at = {r: sp.Float(rv, 40), t: sp.Float(tv, 40), C: sp.Integer(3)}
            assert base.subs(at) > 0
            scale = abs(sp.diff(u, t).subs(at)) + abs(lap.subs(at))
            assert abs(residual.subs(at).evalf(40)) <= sp.Float(1e-30) * scale


@pytest.mark.parametrize("N,m", [(3, 2.0), (2, 3.0), (4, 1.5)])
def test_zkb_mass_and_exponents(N, m):
    z = ZKB(N, m, mass=1.0)
    omega = 2 * math.pi ** (N / 2) / math.gamma(N / 2)
    for t in (0.01, 1.0):
        mass, _ = integrate.quad(lambda s: z(s, t) * omega * s ** (N - 1), 0, z.front(t))
        assert mass == pytest.approx(1.0, rel=1e-10)
    assert z(z.front(1.0) * 1.0001, 1.0) == 0
    assert z.gamma == pytest.approx(1 / ((m - 1) * N + 2))


def test_smoothing_exponents():
    assert smoothing_exponents(2, 3) == pytest.approx((1 / 3, 1 / 3))
    assert smoothing_exponents(4, 3) == pytest.approx((0.4, 0.2))
    assert smoothing_exponents(3, 2) == pytest.approx((0.6, 0.4))


@pytest.mark.parametrize("profile", [E3, H3])
def test_mollified_atom_has_exact_mass_and_newton_potential(profile):
    g = build_grid(profile, 4.0, 400)
    u = mollify_measure(RadialMeasure.dirac(2.5), 0.1, g)
    assert np.sum(u.values * g.volumes) == pytest.approx(2.5, rel=1e-14)
    assert np.all(u.values[g.centers > 0.1] == 0)
    # outside its support a radial mass acts like an atom at the pole
    gp = whole_green(profile)
    r = np.geomspace(0.1, 4.0, 9)
    pot = potential_at(RadialMeasure(0.0, u, profile), gp, r)
    assert np.allclose(pot, 2.5 * gp(r), rtol=1e-8)


def test_mollifier_errors():
    g = build_grid(E3, 1.0, 64)
    with pytest.raises(DomainError):
        mollify_measure(RadialMeasure.dirac(), 2.0, g)
    with pytest.raises(DomainError):
        mollify_measure(RadialMeasure.shell(0.5, 3.0), 0.1, g)


data = st.lists(st.floats(0.0, 5.0), min_size=32, max_size=32)


def _grid32():
    return build_grid(H3, 3.0, 32, grading=1.05)


@settings(max_examples=25)
@given(u0=data, dt=st.floats(1e-4, 1.0))
def test_step_conserves_mass_up_to_boundary_flux(u0, dt):
    g = _grid32()
    u0 = np.array(u0)
    u1 = step_implicit(RadialField(g.edges, u0), dt, CFG, g).values
    lost = dt * g.transmissibility[-1] * u1[-1] ** 2
    scale = max(1.0, np.sum(u0 * g.volumes))
    assert np.sum((u0 - u1) * g.volumes) == pytest.approx(lost, abs=1e-10 * scale)


@settings(max_examples=25)
@given(u0=data, extra=data, dt=st.floats(1e-4, 1.0))
def test_comparison_principle(u0, extra, dt):
    g = _grid32()
    u0 = np.array(u0)
    v0 = u0 + np.array(extra)
    u1 = step_implicit(RadialField(g.edges, u0), dt, CFG, g).values
    v1 = step_implicit(RadialField(g.edges, v0), dt, CFG, g).values
    assert np.all(u1 <= v1 + 1e-9 * max(1.0, v0.max()))
    assert np.all(u1 >= 0)


@settings(max_examples=10)
@given(u0=data)
def test_norms_decrease_along_trajectories(u0):
    g = _grid32()
    cfg = SolverConfig(m=2.0, t_end=1.0, dt0=1e-4, growth=1.1, t_first=1e-3, snapshots_per_decade=3)
    tr = integrate_field(np.array(u0), g, cfg)
    d = tr.diagnostics()
    tol = 1e-9 * max(1.0, d["linf"][0])
    assert np.all(np.diff(d["lmp1"]) <= tol)
    assert np.all(np.diff(d["linf"]) <= tol)
    assert np.all(np.diff(d["mass"]) <= tol)


def test_cauchy_limit_euclidean_balls():
    cfg = SolverConfig(m=2.0, t_end=1.0, cells=800, t_first=1e-2, snapshots_per_decade=5)
    tr = solve_cauchy(E3, RadialMeasure.dirac(), cfg, (4.0, 8.0), (0.05,))
    assert tr.report.passed
    # the support stays far inside both balls, so the truncation is invisible
    assert tr.report.details["l1_diff_R_final"] < 1e-6
    assert tr.R == 8.0 and not tr.report.details["aborted"]


def test_schedule_validation():
    with pytest.raises(DomainError):
        solve_cauchy(E3, RadialMeasure.dirac(), CFG, (8.0, 4.0), (0.1,))
    with pytest.raises(DomainError):
        solve_cauchy(E3, RadialMeasure.dirac(), CFG, (4.0,), (0.1, 0.2))


def test_two_dimensional_smoothing_rate():
    cfg = SolverConfig(m=3.0, t_end=0.1, cells=1000, grading=1.002, t_first=1e-3, snapshots_per_decade=10)
    tr = solve_ball(E2, 4.0, RadialMeasure.dirac(), 0.01, cfg, require_hypothesis=False)
    slope, _ = smoothing_exponent_fit(tr, (1e-2, 1e-1))
    assert slope == pytest.approx(-1 / 3, abs=0.02)


def test_e2_requires_override():
    with pytest.raises(ConfigurationError):
        solve_ball(E2, 4.0, RadialMeasure.dirac(), 0.1, CFG)


def test_fit_needs_snapshots():
    cfg = SolverConfig(m=2.0, t_end=0.1, cells=64, t_first=0.05, snapshots_per_decade=2)
    tr = solve_ball(E3, 2.0, RadialMeasure.dirac(), 0.2, cfg)
    with pytest.raises(InsufficientDataError):
        smoothing_exponent_fit(tr, (0.01, 0.1))


def test_config_validation_messages():
    with pytest.raises(ConfigurationError, match="m must exceed 1"):
        SolverConfig(m=0.8)
    with pytest.raises(ConfigurationError, match="cells must be at least 16"):
        SolverConfig(cells=4)


def test_signed_data():
    g = build_grid(E3, 2.0, 64)
    u0 = np.where(g.centers < 1.0, 1.0, -1.0)
    cfg = SolverConfig(m=2.0, t_end=0.01, dt0=1e-4, t_first=1e-3, snapshots_per_decade=2)
    with pytest.raises(ConfigurationError):
        integrate_field(u0, g, cfg)
    tr = integrate_field(u0, g, SolverConfig(m=2.0, t_end=0.01, dt0=1e-4, t_first=1e-3,
                                             snapshots_per_decade=2, signed_mode=True))
    assert not tr.aborted and np.any(tr.snapshots[-1] < 0)
    with pytest.raises(ConfigurationError):
        solve_ball(E3, 2.0, RadialMeasure(-1.0), 0.1, CFG)


def test_time_step_underflow_aborts():
    g = build_grid(E3, 1.0, 32)
    cfg = SolverConfig(m=2.0, t_end=1.0, dt0=1e-6, dt_min=1e-3)
    tr = integrate_field(np.ones(g.M), g, cfg)
    assert tr.aborted and "below dt_min" in tr.message


def test_zkb_short_evolution():
    rep = check_zkb_oracle(cells=4096, t0=0.01, t1=0.02, l1_tol=0.01)
    assert rep.passed, rep.summary_line()
