"""Conservative implicit finite-volume solver for u_t = Laplacian(u^m) on radial balls.

Cells ``[r_{i-1/2}, r_{i+1/2}]`` carry averages ``u_i``.  One backward-Euler
step solves

    V_i (u_i^+ - u_i) = dt (F_{i+1/2} - F_{i-1/2}),
    F_{i+1/2} = A_{i+1/2} (w_{i+1} - w_i) / (r_{i+1} - r_i),   w = |u|^(m-1) u,

with zero flux at the pole and the Dirichlet ghost value ``w = 0`` on the
sphere of radius ``R``.  Data with a pole atom enter through mollification
and solutions of the Cauchy problem are approximated by nested balls.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import linalg

from .barenblatt import smoothing_exponents
from .errors import (ConfigurationError, DomainError, InsufficientDataError,
                     PmeLabError, StepFailure)
from .manifold import check_hypothesis
from .potential import RadialField, _cell_integral
from .report import VerificationReport, timed

__all__ = [
    "SolverConfig",
    "RadialGrid",
    "Trajectory",
    "TimeStepUnderflow",
    "build_grid",
    "step_implicit",
    "mollify_measure",
    "solve_ball",
    "solve_cauchy",
    "smoothing_exponent_fit",
    "integrate_field",
]


class TimeStepUnderflow(PmeLabError):
    """The adaptive time step fell below ``SolverConfig.dt_min``."""


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of a ball solve.

    ``eps_jacobian`` is relative: the Jacobian regularization added to
    ``m |u|^(m-1)`` is ``eps_jacobian * max|u|^(m-1)``.  Snapshot times are
    geometric, ``snapshots_per_decade`` per decade, from ``t_first`` to
    ``t_end`` unless ``snapshot_times`` is given.
    """

    m: float = 2.0
    dt0: float = 1e-12
    growth: float = 1.01
    t_end: float = 1.0
    dt_max: float = math.inf
    dt_min: float = 1e-18
    newton_max_iter: int = 40
    newton_tol: float = 1e-12
    eps_jacobian: float = 1e-12
    cells: int = 800
    grading: float = 1.0
    signed_mode: bool = False
    snapshots_per_decade: int = 20
    t_first: float = 1e-6
    snapshot_times: tuple = ()

    def __post_init__(self):
        errors = self.validation_errors()
        if errors:
            raise ConfigurationError("; ".join(errors))

    def validation_errors(self):
        errs = []
        if not self.m > 1:
            errs.append("m must exceed 1")
        if not self.dt0 > 0:
            errs.append("dt0 must be positive")
        if not self.growth >= 1:
            errs.append("growth must be at least 1")
        if not self.t_end > 0:
            errs.append("t_end must be positive")
        if not self.newton_tol > 0:
            errs.append("newton_tol must be positive")
        if self.newton_max_iter < 1:
            errs.append("newton_max_iter must be positive")
        if self.eps_jacobian < 0:
            errs.append("eps_jacobian must be nonnegative")
        if self.cells < 16:
            errs.append("cells must be at least 16")
        if not self.grading > 0:
            errs.append("grading must be positive")
        if self.snapshots_per_decade < 1:
            errs.append("snapshots_per_decade must be positive")
        return errs

    def exponents(self, N):
        """Smoothing exponents ``(alpha, beta)`` in dimension ``N``."""
        return smoothing_exponents(N, self.m)

    def times(self):
        if self.snapshot_times:
            ts = np.asarray(sorted(t for t in self.snapshot_times if 0 < t <= self.t_end), dtype=float)
            if ts.size == 0 or ts[-1] != self.t_end:
                ts = np.append(ts, self.t_end)
            return ts
        t_first = min(self.t_first, self.t_end)
        n = max(1, int(math.ceil(self.snapshots_per_decade * math.log10(self.t_end / t_first)))) + 1
        ts = np.geomspace(t_first, self.t_end, n)
        ts[-1] = self.t_end
        return ts


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Finite-volume grid of the ball ``B_R``: interfaces, centers, volumes, areas."""

    profile: object
    edges: np.ndarray
    centers: np.ndarray
    volumes: np.ndarray
    areas: np.ndarray
    transmissibility: np.ndarray

    @property
    def R(self):
        return float(self.edges[-1])

    @property
    def M(self):
        return self.centers.size

    def truncate(self, R):
        """Prefix grid whose outer interface is the interface nearest to ``R``."""
        k = int(np.argmin(np.abs(self.edges - R)))
        if k < 16:
            raise DomainError("truncated grid would have fewer than 16 cells")
        return _make_grid(self.profile, self.edges[: k + 1], self.volumes[:k])

    def field(self, values):
        return RadialField(self.edges, values)


def _make_grid(profile, edges, volumes=None):
    edges = np.asarray(edges, dtype=float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    if volumes is None:
        volumes = profile.volume_between(edges[:-1], edges[1:])
    areas = profile.area_density(edges)
    areas[0] = 0.0
    # face i+1/2 for i = 0..M-2 between centers, last face on the Dirichlet wall
    dist = np.append(np.diff(centers), edges[-1] - centers[-1])
    trans = areas[1:] / dist
    for arr in (edges, centers, volumes, areas, trans):
        arr.setflags(write=False)
    return RadialGrid(profile, edges, centers, np.asarray(volumes), areas, trans)


def build_grid(profile, R, M, grading=1.0):
    """Grid of ``M`` cells on ``[0, R]`` with widths growing geometrically by ``grading``."""
    if R <= 0:
        raise DomainError("R must be positive")
    if M < 16:
        raise DomainError("at least 16 cells are required")
    if not grading > 0:
        raise DomainError("grading must be positive")
    profile._check(R)
    if grading == 1.0:
        edges = np.linspace(0.0, R, M + 1)
    else:
        widths = grading ** np.arange(M)
        edges = np.concatenate([[0.0], np.cumsum(widths)])
        edges *= R / edges[-1]
    edges[-1] = R
    return _make_grid(profile, edges)


# ---------------------------------------------------------------------- one implicit step
def _w(u, m):
    return np.abs(u) ** (m - 1.0) * u


def _operator(w, grid):
    """Flux divergence ``F_{i+1/2} - F_{i-1/2}`` and the boundary outflux."""
    T = grid.transmissibility
    flux = np.empty_like(w)
    flux[:-1] = T[:-1] * (w[1:] - w[:-1])
    flux[-1] = -T[-1] * w[-1]
    div = flux.copy()
    div[1:] -= flux[:-1]
    return div, -flux[-1]


def _dissipation(w, grid):
    T = grid.transmissibility
    return float(np.sum(T[:-1] * np.diff(w) ** 2) + T[-1] * w[-1] ** 2)


def _newton(u_old, dt, grid, cfg):
    m, V, T = cfg.m, grid.volumes, grid.transmissibility
    u = u_old.copy()
    scale = float(np.sum(np.abs(u_old) * V)) or 1.0
    eps_j = cfg.eps_jacobian * max(float(np.max(np.abs(u_old))), 1e-300) ** (m - 1.0)

    def residual(u):
        div, _ = _operator(_w(u, m), grid)
        return V * (u - u_old) - dt * div

    res = residual(u)
    norm = np.sum(np.abs(res))
    ab = np.zeros((3, u.size))
    for it in range(1, cfg.newton_max_iter + 1):
        if norm <= cfg.newton_tol * scale:
            return u, it - 1
        dw = m * np.abs(u) ** (m - 1.0) + eps_j
        ab[1] = V + dt * dw * (np.append(T[:-1], 0.0) + np.append(0.0, T[:-1]))
        ab[1, -1] += dt * dw[-1] * T[-1]
        ab[0, 1:] = -dt * T[:-1] * dw[1:]
        ab[2, :-1] = -dt * T[:-1] * dw[:-1]
        delta = linalg.solve_banded((1, 1), ab, -res, overwrite_ab=False, check_finite=False)
        lam = 1.0
        while True:
            trial = u + lam * delta
            if not cfg.signed_mode:
                trial = np.maximum(trial, 0.0)
            res_t = residual(trial)
            norm_t = np.sum(np.abs(res_t))
            if norm_t < norm or lam < 1e-4:
                break
            lam *= 0.5
        u, res, norm = trial, res_t, norm_t
    if norm <= cfg.newton_tol * scale:
        return u, cfg.newton_max_iter
    raise StepFailure(f"Newton did not converge: residual {norm / scale:.3e}")


def step_implicit(state, dt, cfg, grid):
    """Advance ``state`` (a :class:`RadialField` on ``grid``) by one backward-Euler step."""
    if not dt > 0:
        raise DomainError("dt must be positive")
    if dt < cfg.dt_min:
        raise TimeStepUnderflow("time step below dt_min")
    values = state.values if isinstance(state, RadialField) else np.asarray(state, dtype=float)
    if values.shape != (grid.M,):
        raise ConfigurationError("state does not live on this grid")
    u, _ = _newton(np.asarray(values, dtype=float), dt, grid, cfg)
    return RadialField(grid.edges, u)


# ---------------------------------------------------------------------- data
def _bump(s, eps):
    x = np.clip(np.asarray(s, dtype=float) / eps, 0.0, 1.0)
    return (1.0 - x**2) ** 3


def mollify_measure(mu, eps, grid):
    """Cell averages on ``grid`` of ``mu`` with its pole atom spread over ``B_eps``.

    The atom becomes ``atom * phi / int phi dV`` with the C^2 bump
    ``phi(s) = (1 - (s/eps)^2)^3``; normalization uses the same cell sums,
    so the discrete mass equals the atom exactly.
    """
    if not eps > 0:
        raise DomainError("eps must be positive")
    if eps > grid.R:
        raise DomainError("mollification radius exceeds the ball")
    profile, edges = grid.profile, grid.edges
    a, b = edges[:-1], edges[1:]
    values = np.zeros(grid.M)
    if mu.atom:
        hit = a < eps
        bump = np.zeros(grid.M)
        bump[hit] = _cell_integral(lambda s: _bump(s, eps) * profile.area_density(s), a[hit], np.minimum(b[hit], eps))
        values += mu.atom * bump / (np.sum(bump) * grid.volumes)
    if mu.density is not None and np.any(mu.density.values):
        d = mu.density
        support = d.edges[1:][d.values != 0]
        if support.max() > grid.R * (1 + 1e-12):
            raise DomainError("measure density is not supported in the ball")
        mass = np.zeros(grid.M)
        for j in np.flatnonzero(d.values):
            lo = np.maximum(a, d.edges[j])
            hi = np.minimum(b, d.edges[j + 1])
            ov = hi > lo
            mass[ov] += d.values[j] * _cell_integral(profile.area_density, lo[ov], hi[ov])
        values += mass / grid.volumes
    return RadialField(edges, values)


# ---------------------------------------------------------------------- trajectories
@dataclass
class Trajectory:
    """Snapshots of a ball solve plus per-step diagnostics.

    Diagnostics are recorded after every accepted step; ``dissipation`` and
    ``boundary_flux`` are cumulative from ``t = 0``.
    """

    grid: RadialGrid
    cfg: SolverConfig
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diag_t: list = field(default_factory=list)
    diag_mass: list = field(default_factory=list)
    diag_linf: list = field(default_factory=list)
    diag_lmp1: list = field(default_factory=list)
    diag_dissipation: list = field(default_factory=list)
    diag_boundary_flux: list = field(default_factory=list)
    steps: int = 0
    rejected: int = 0
    newton_iterations: int = 0
    aborted: bool = False
    message: str = ""
    eps: float = 0.0
    report: object = None

    @property
    def R(self):
        return self.grid.R

    def field(self, k):
        return RadialField(self.grid.edges, self.snapshots[k])

    def snapshot_at(self, t):
        k = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if not math.isclose(self.times[k], t, rel_tol=1e-9, abs_tol=1e-300):
            raise DomainError(f"no snapshot at t = {t}")
        return self.snapshots[k]

    def diagnostics(self):
        """Arrays ``t, mass, linf, lmp1, dissipation, boundary_flux``."""
        return {k: np.asarray(getattr(self, "diag_" + k)) for k in
                ("t", "mass", "linf", "lmp1", "dissipation", "boundary_flux")}

    def energy(self, k):
        """``(1/(m+1)) int |u|^(m+1) dV`` at diagnostic index ``k``."""
        m = self.cfg.m
        return self.diag_lmp1[k] ** (m + 1) / (m + 1)

    def energy_defect(self, t1=None, t2=None):
        """Relative defect of the energy ledger between diagnostic times ``t1 < t2``.

        ``int_{t1}^{t2} int |grad u^m|^2 + E(t2) - E(t1)``, divided by ``E(t1)``.
        """
        t = np.asarray(self.diag_t)
        i = 0 if t1 is None else int(np.argmin(np.abs(t - t1)))
        j = len(t) - 1 if t2 is None else int(np.argmin(np.abs(t - t2)))
        e1, e2 = self.energy(i), self.energy(j)
        dis = self.diag_dissipation[j] - self.diag_dissipation[i]
        return abs(dis + e2 - e1) / e1 if e1 > 0 else 0.0

    def values_at(self, r):
        """Matrix ``u(r_j, t_k)`` (snapshots x radii), linear in r between centers."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        c = self.grid.centers
        return np.array([np.interp(r, c, s) for s in self.snapshots])


def _record(traj, t, u, dissipation, boundary_flux):
    V, m = traj.grid.volumes, traj.cfg.m
    traj.diag_t.append(t)
    traj.diag_mass.append(float(np.sum(u * V)))
    traj.diag_linf.append(float(np.max(np.abs(u))))
    traj.diag_lmp1.append(float(np.sum(np.abs(u) ** (m + 1) * V)) ** (1.0 / (m + 1)))
    traj.diag_dissipation.append(dissipation)
    traj.diag_boundary_flux.append(boundary_flux)


def integrate_field(u0, grid, cfg):
    """Time-integrate cell values ``u0`` on ``grid`` to ``cfg.t_end``."""
    if not cfg.signed_mode and np.any(np.asarray(u0) < 0):
        raise ConfigurationError("negative data requires signed_mode")
    traj = Trajectory(grid, cfg)
    u = np.array(u0, dtype=float)
    t, dt = 0.0, cfg.dt0
    if cfg.dt_max < dt:
        dt = cfg.dt_max
    traj.times.append(0.0)
    traj.snapshots.append(u.copy())
    dissipation = flux_out = 0.0
    _record(traj, t, u, dissipation, flux_out)
    targets = list(cfg.times())
    while targets:
        target = targets[0]
        step = min(dt, target - t)
        hit = step >= target - t
        try:
            if step < cfg.dt_min:
                raise TimeStepUnderflow(f"time step {step:.3e} below dt_min at t = {t:.6g}")
            u_new, its = _newton(u, step, grid, cfg)
        except StepFailure:
            traj.rejected += 1
            dt *= 0.5
            if dt < cfg.dt_min:
                traj.aborted = True
                traj.message = f"time step underflow at t = {t:.6g}"
                return traj
            continue
        except TimeStepUnderflow as exc:
            traj.aborted = True
            traj.message = str(exc)
            return traj
        w = _w(u_new, cfg.m)
        dissipation += step * _dissipation(w, grid)
        flux_out += step * grid.transmissibility[-1] * w[-1]
        u = u_new
        t = target if hit else t + step
        traj.steps += 1
        traj.newton_iterations += its
        _record(traj, t, u, dissipation, flux_out)
        if hit:
            targets.pop(0)
            traj.times.append(t)
            traj.snapshots.append(u.copy())
        else:
            dt = min(dt * cfg.growth, cfg.dt_max)
    return traj


def solve_ball(profile, R, mu, eps, cfg, grid=None, require_hypothesis=True):
    """Solve the ball problem with Dirichlet data for the mollified measure ``mu``.

    Returns the :class:`Trajectory`; if the time step underflows the run
    stops and the partial trajectory is returned with ``aborted`` set.
    """
    if require_hypothesis:
        rep = check_hypothesis(profile, R)
        if profile.N < 3 or not rep.satisfies_H:
            raise ConfigurationError("hypothesis (H) fails; pass require_hypothesis=False to override")
    if not cfg.signed_mode and not mu.is_nonnegative:
        raise ConfigurationError("signed data require signed_mode")
    if grid is None:
        grid = build_grid(profile, R, cfg.cells, cfg.grading)
    u0 = mollify_measure(mu, eps, grid)
    traj = integrate_field(u0.values, grid, cfg)
    traj.eps = eps
    return traj


def _nested_grids(profile, R_schedule, cfg):
    big = build_grid(profile, max(R_schedule), cfg.cells, cfg.grading)
    return [big if R == max(R_schedule) else big.truncate(R) for R in R_schedule]


def solve_cauchy(profile, mu, cfg, R_schedule, eps_schedule, require_hypothesis=True, tolerance=1e-9):
    """Approximate the Cauchy problem by balls of growing radius and shrinking mollification.

    All balls share one grid (smaller balls use a prefix of it), so the
    discrete comparison principle applies between radii.  The returned
    trajectory is the run with the largest ``R`` and smallest ``eps``; its
    ``report`` holds the monotonicity and convergence diagnostics.
    """
    R_schedule = list(R_schedule)
    eps_schedule = list(eps_schedule)
    if any(b <= a for a, b in zip(R_schedule, R_schedule[1:])):
        raise DomainError("R_schedule must be increasing")
    if any(b >= a for a, b in zip(eps_schedule, eps_schedule[1:])):
        raise DomainError("eps_schedule must be decreasing")
    monotone = mu.is_nonnegative and not cfg.signed_mode
    grids = _nested_grids(profile, R_schedule, cfg)
    runs = {}
    report = VerificationReport("cauchy_monotone_limit", tolerance=tolerance,
                                inputs={"R": R_schedule, "eps": eps_schedule})
    with timed(report):
        for eps in eps_schedule:
            for R, grid in zip(R_schedule, grids):
                runs[eps, R] = solve_ball(profile, R, mu, eps, cfg, grid=grid,
                                          require_hypothesis=require_hypothesis)
            if monotone:
                for Ra, Rb in zip(R_schedule, R_schedule[1:]):
                    a, b = runs[eps, Ra], runs[eps, Rb]
                    report.add(f"violation eps={eps:g} R={Ra:g}<{Rb:g}", _violation(a, b))
        finest = runs[eps_schedule[-1], R_schedule[-1]]
        if len(R_schedule) > 1:
            a = runs[eps_schedule[-1], R_schedule[-2]]
            report.details["max_diff_R"] = _max_diff(a, finest)
            report.details["l1_diff_R_final"] = _l1_diff(a, finest)
        if len(eps_schedule) > 1:
            a = runs[eps_schedule[-2], R_schedule[-1]]
            report.details["max_diff_eps"] = _max_diff(a, finest)
        report.details["actual_R"] = [g.R for g in grids]
        report.details["aborted"] = any(r.aborted for r in runs.values())
    finest.report = report
    return finest


def _violation(small, big):
    n = min(len(small.snapshots), len(big.snapshots))
    worst = 0.0
    for k in range(n):
        a, b = small.snapshots[k], big.snapshots[k][: small.grid.M]
        scale = max(1.0, float(np.max(np.abs(big.snapshots[k]))))
        worst = max(worst, float(np.max(a - b)) / scale)
    return max(worst, 0.0)


def _max_diff(small, big):
    n = min(len(small.snapshots), len(big.snapshots))
    return max(float(np.max(np.abs(small.snapshots[k] - big.snapshots[k][: small.grid.M]))) for k in range(n))


def _l1_diff(small, big):
    a, b = small.snapshots[-1], big.snapshots[-1]
    V = big.grid.volumes
    M = small.grid.M
    return float(np.sum(np.abs(a - b[:M]) * V[:M]) + np.sum(np.abs(b[M:]) * V[M:]))


def smoothing_exponent_fit(traj, t_window):
    """Least-squares slope and intercept of ``log ||u(t)||_inf`` against ``log t``.

    Uses the snapshots with ``t`` inside the closed window.
    """
    t1, t2 = t_window
    t = np.asarray(traj.times)
    sel = (t >= t1 * (1 - 1e-12)) & (t <= t2 * (1 + 1e-12)) & (t > 0)
    if np.count_nonzero(sel) < 5:
        raise InsufficientDataError("smoothing fit needs at least 5 snapshots in the window")
    linf = np.array([np.max(np.abs(traj.snapshots[k])) for k in np.flatnonzero(sel)])
    slope, intercept = np.polyfit(np.log(t[sel]), np.log(linf), 1)
    return float(slope), float(intercept)


def smoothing_bound_constant(traj, t_window, alpha):
    """``max (log ||u(t)||_inf + alpha log t)`` over the window: a fitted ``log K |mu|``."""
    t = np.asarray(traj.times)
    sel = (t >= t_window[0] * (1 - 1e-12)) & (t <= t_window[1] * (1 + 1e-12)) & (t > 0)
    linf = np.array([np.max(np.abs(traj.snapshots[k])) for k in np.flatnonzero(sel)])
    return float(np.max(np.log(linf) + alpha * np.log(t[sel])))
