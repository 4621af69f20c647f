"""Radial fields and measures, their Green potentials, and mean-value operators at the pole.

Potentials use the shell-mean reduction: the spherical mean of ``G(x, .)``
over the geodesic sphere of radius ``s`` equals ``g(max(r, s))`` when
``|x| = r``.  Hence for a radial measure with pole atom ``a`` and density
``f``

    G^mu(r) = a g(r) + g(r) mu(B_r) + int_{s > r} g(s) f(s) dV(s).
"""
import math
import warnings

import numpy as np
from scipy import integrate

from ._quadrature import gauss_legendre
from .errors import ConfigurationError, DomainError, RangeError
from .green import level_radius
from .report import VerificationReport, timed

__all__ = [
    "RadialField",
    "RadialMeasure",
    "potential",
    "potential_at",
    "potential_energy_identity",
    "mean_value_m",
    "mean_value_M",
    "mean_value_M_coarea",
    "audit_M_monotonicity",
]


class RadialField:
    """Radial function stored as cell values on ``0 = r_0 < r_1 < ... < r_M``.

    Point evaluation interpolates linearly between cell centers, with
    constant extension below the first center and above the last one.
    When the field is used as a density the values are cell averages.
    An optional singular part ``pole_mass * green(r)`` models potentials
    of pole atoms; it is infinite at the pole.
    """

    def __init__(self, edges, values, pole_mass=0.0, green=None):
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise DomainError("a field needs at least one cell")
        if edges[0] != 0.0:
            raise DomainError("the first edge must be the pole r = 0")
        if np.any(np.diff(edges) <= 0):
            raise DomainError("grid radii must be strictly increasing")
        if values.shape != (edges.size - 1,):
            raise DomainError("one value per cell is required")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        if pole_mass and green is None:
            raise DomainError("a singular pole part needs a Green profile")
        self.edges = edges
        self.values = values
        self.pole_mass = float(pole_mass)
        self.green = green
        self.edges.setflags(write=False)
        self.values.setflags(write=False)

    @classmethod
    def from_function(cls, edges, f):
        """Sample ``f`` at the cell centers."""
        edges = np.asarray(edges, dtype=float)
        return cls(edges, f(0.5 * (edges[:-1] + edges[1:])))

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def outer_radius(self):
        return self.edges[-1]

    def regular(self, r):
        """The interpolated cell values, without the singular pole part."""
        r = np.asarray(r, dtype=float)
        if np.any(r > self.edges[-1] * (1 + 1e-12)):
            raise RangeError("radius beyond the outer edge of the field")
        return np.interp(r, self.centers, self.values)

    def __call__(self, r):
        val = self.regular(r)
        if self.pole_mass:
            val = val + self.pole_mass * self.green(r)
        return val

    def scaled(self, a):
        return RadialField(self.edges, a * self.values, a * self.pole_mass, self.green)

    def __add__(self, other):
        if not isinstance(other, RadialField) or not np.array_equal(self.edges, other.edges):
            return NotImplemented
        if self.pole_mass and other.pole_mass and self.green is not other.green:
            raise ConfigurationError("singular parts refer to different Green profiles")
        return RadialField(self.edges, self.values + other.values,
                           self.pole_mass + other.pole_mass, self.green or other.green)

    def cell_volumes(self, profile):
        return profile.volume_between(self.edges[:-1], self.edges[1:])

    def integral(self, profile):
        """``int f dV`` treating values as cell averages (regular part only)."""
        return float(np.sum(self.values * self.cell_volumes(profile)))


class RadialMeasure:
    """Finite radial Radon measure: ``atom * delta_o + f dV``.

    ``density`` is a :class:`RadialField` of cell averages (piecewise
    constant in the measure sense), or ``None``.
    """

    def __init__(self, atom=0.0, density=None, profile=None):
        self.atom = float(atom)
        self.density = density
        self.profile = profile
        if density is not None and density.pole_mass:
            raise DomainError("a measure density cannot carry a singular part")

    @classmethod
    def dirac(cls, mass=1.0, profile=None):
        return cls(atom=mass, profile=profile)

    @classmethod
    def shell(cls, inner, outer, value=1.0, profile=None):
        """Uniform density ``value`` on the shell ``inner <= r <= outer``."""
        if not 0 <= inner < outer:
            raise DomainError("shell radii must satisfy 0 <= inner < outer")
        if inner == 0:
            field = RadialField([0.0, outer], [value])
        else:
            field = RadialField([0.0, inner, outer], [0.0, value])
        return cls(density=field, profile=profile)

    @classmethod
    def from_function(cls, f, edges, atom=0.0, profile=None):
        """Density given by a callable, stored as cell averages on ``edges``.

        The averages use a 16-point rule per cell against the volume
        density when ``profile`` is given, else plain center values.
        """
        edges = np.asarray(edges, dtype=float)
        if profile is None:
            return cls(atom, RadialField.from_function(edges, f))
        a, b = edges[:-1], edges[1:]
        num = _cell_integral(lambda s: f(s) * profile.area_density(s), a, b)
        vol = _cell_integral(profile.area_density, a, b)
        return cls(atom, RadialField(edges, num / vol), profile=profile)

    @property
    def is_nonnegative(self):
        return self.atom >= 0 and (self.density is None or np.all(self.density.values >= 0))

    def total_mass(self, profile):
        mass = self.atom
        if self.density is not None:
            mass += self.density.integral(profile)
        return mass

    def total_variation(self, profile):
        tv = abs(self.atom)
        if self.density is not None:
            tv += float(np.sum(np.abs(self.density.values) * self.density.cell_volumes(profile)))
        return tv

    def split(self):
        """Jordan decomposition into nonnegative parts ``(mu_plus, mu_minus)``."""
        def part(sign):
            dens = None
            if self.density is not None:
                dens = RadialField(self.density.edges, np.maximum(sign * self.density.values, 0.0))
            return RadialMeasure(max(sign * self.atom, 0.0), dens, self.profile)
        return part(1.0), part(-1.0)


# ---------------------------------------------------------------------- quadrature helpers
def _cell_integral(f, a, b):
    """Integrate over cells ``[a, b]``; cells touching the pole use ``s = b t^2``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast(a, b).shape)
    a, b = np.broadcast_to(a, out.shape), np.broadcast_to(b, out.shape)
    at0 = a == 0
    if np.any(at0):
        bb = b[at0]
        out[at0] = gauss_legendre(lambda t: f(bb[..., None] * t**2) * 2.0 * bb[..., None] * t,
                                  np.zeros_like(bb), np.ones_like(bb))
    if np.any(~at0):
        out[~at0] = gauss_legendre(f, a[~at0], b[~at0])
    return out


def _quadrature_mesh(edges, ratio=1.1, floor=1e-7):
    """Refine density edges so every panel is short compared with its distance to the pole."""
    edges = np.asarray(edges, dtype=float)
    outer = edges[-1]
    geo = np.geomspace(floor * outer, outer, int(math.ceil(math.log(1.0 / floor) / math.log(ratio))) + 1)
    mesh = np.union1d(edges, geo)
    # edges far inside the floor carry no resolvable mass and make g overflow
    keep = (mesh == 0) | ((mesh >= 1e-5 * floor * outer) & (mesh <= outer))
    return mesh[keep]


class _DensityTables:
    """Cumulative mass and far-field integral of a piecewise-constant density."""

    def __init__(self, density, gp):
        profile = gp.profile
        mesh = _quadrature_mesh(density.edges)
        # density value on each mesh panel
        idx = np.clip(np.searchsorted(density.edges, 0.5 * (mesh[:-1] + mesh[1:])) - 1, 0, density.values.size - 1)
        f = density.values[idx]
        a, b = mesh[:-1], mesh[1:]
        self.mesh, self.f, self.gp, self.profile = mesh, f, gp, profile
        vol = _cell_integral(profile.area_density, a, b)
        gvol = _cell_integral(lambda s: gp(s) * profile.area_density(s), a, b)
        self.mass_cum = np.concatenate([[0.0], np.cumsum(f * vol)])
        far = f * gvol
        self.far_cum = np.concatenate([np.cumsum(far[::-1])[::-1], [0.0]])

    def mass_within(self, r):
        r = np.minimum(np.asarray(r, dtype=float), self.mesh[-1])
        k = np.clip(np.searchsorted(self.mesh, r, side="right") - 1, 0, self.f.size - 1)
        part = _cell_integral(self.profile.area_density, self.mesh[k], r)
        return self.mass_cum[k] + self.f[k] * part

    def potential(self, r):
        r = np.asarray(r, dtype=float)
        inside = r < self.mesh[-1]
        out = self.gp(r) * self.mass_within(r)
        if np.any(inside):
            ri = r[inside]
            k = np.clip(np.searchsorted(self.mesh, ri, side="right") - 1, 0, self.f.size - 1)
            right = self.mesh[k + 1]
            part = gauss_legendre(lambda s: self.gp(s) * self.profile.area_density(s), ri, right)
            out[inside] += self.far_cum[k + 1] + self.f[k] * part
        return out


def _check_pair(measure, gp):
    if measure.profile is not None and measure.profile is not gp.profile:
        raise ConfigurationError("measure and Green profile live on different manifolds")
    if gp.is_ball and measure.density is not None:
        support = measure.density.edges[1:][measure.density.values != 0]
        if support.size and support.max() > gp.R * (1 + 1e-12):
            raise ConfigurationError("measure is not supported in the ball")


def potential_at(measure, gp, r):
    """Green potential of ``measure`` evaluated at radii ``r > 0``."""
    _check_pair(measure, gp)
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    if measure.atom:
        out = out + measure.atom * gp(r)
    if measure.density is not None and np.any(measure.density.values):
        out = out + _DensityTables(measure.density, gp).potential(r)
    return out


def default_edges(measure, gp, cells=400):
    """Output grid for potentials: geometric toward the pole, past the support."""
    outer = gp.R if gp.is_ball else 4.0 * (measure.density.edges[-1] if measure.density is not None else 1.0)
    inner = np.geomspace(1e-4 * outer, outer, cells)
    return np.concatenate([[0.0], inner])


def potential(measure, gp, edges=None):
    """Green potential ``G^mu`` of a radial measure as a :class:`RadialField`.

    The regular part is evaluated exactly at the cell centers of ``edges``;
    a pole atom is carried as the singular part ``atom * g``.
    """
    _check_pair(measure, gp)
    if edges is None:
        edges = default_edges(measure, gp)
    edges = np.asarray(edges, dtype=float)
    centers = 0.5 * (edges[:-1] + edges[1:])
    values = np.zeros_like(centers)
    if measure.density is not None and np.any(measure.density.values):
        values = _DensityTables(measure.density, gp).potential(centers)
    return RadialField(edges, values, pole_mass=measure.atom, green=gp if measure.atom else None)


def potential_energy_identity(f, gp):
    """Both sides of ``int |grad G^f|^2 dV = int f G^f dV`` for a density field ``f``."""
    profile = gp.profile
    if profile.N < 3:
        raise DomainError("the energy identity is stated for N >= 3")
    if f.pole_mass or not np.all(np.isfinite(f.values)):
        raise DomainError("density must be bounded and integrable")
    if np.any(f.values < 0):
        raise DomainError("density must be nonnegative")
    if not np.any(f.values):
        return 0.0, 0.0
    tables = _DensityTables(f, gp)
    mesh, fv = tables.mesh, tables.f
    a, b = mesh[:-1], mesh[1:]
    omega = profile.omega

    # |grad G^f| = mu(B_s) / (omega psi^(N-1)); inner masses by nested quadrature
    def grad_sq(s):
        m = tables.mass_within(s)
        return m**2 * profile.inverse_area(s) / omega

    lhs = float(np.sum(_cell_integral(grad_sq, a, b)))
    total = tables.mass_cum[-1]
    if not gp.is_ball:
        lhs += total**2 * float(gp(mesh[-1]))
    elif mesh[-1] < gp.R:
        lhs += total**2 * float(gp(mesh[-1]))
    rhs = float(np.sum(fv * _cell_integral(lambda s: tables.potential(s) * profile.area_density(s), a, b)))
    return float(lhs), rhs


# ---------------------------------------------------------------------- mean-value operators
def _eval_radial(u, s):
    if isinstance(u, RadialField):
        return u.regular(s)
    return u(s)


def mean_value_m(u, gp, r):
    """Level-set mean ``m_r[u](o)`` at the pole for a radial ``u``.

    The level set ``{G = 1/r}`` is the sphere of radius ``s = level_radius(1/r)``
    and the flux of ``G`` through it is one, so the mean is ``u(s)``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise RangeError("mean-value parameter must be positive")
    s = level_radius(gp, 1.0 / r)
    val = _eval_radial(u, s)
    if isinstance(u, RadialField) and u.pole_mass:
        sing = 1.0 / r if u.green is gp else u.green(s)
        val = val + u.pole_mass * sing
    return val


def _field_M(u, gp, r, alpha):
    """Regular-part integral ``int_0^r xi^alpha u(s(xi)) dxi`` for a field, panelled at its kinks."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    c = u.centers
    # xi at which the level sphere crosses each cell center
    with np.errstate(divide="ignore", over="ignore"):
        xi_knots = 1.0 / gp(c)  # inf where g underflows: those cells are never reached
    r_hi = float(r.max())
    inside = xi_knots < r_hi
    knots = xi_knots[inside]
    vals = u.values
    # below the first center u is constant
    first = vals[0] * knots[0] ** (alpha + 1) / (alpha + 1) if knots.size else None

    def integrand(xi):
        return xi**alpha * u.regular(level_radius(gp, 1.0 / xi))

    out = np.empty_like(r)
    if knots.size == 0:
        out[:] = vals[0] * r ** (alpha + 1) / (alpha + 1)
        return out
    panels = gauss_legendre(integrand, knots[:-1], knots[1:]) if knots.size > 1 else np.zeros(0)
    cum = np.concatenate([[first], first + np.cumsum(panels)])
    k = np.searchsorted(knots, r, side="right") - 1
    below = k < 0
    out[below] = vals[0] * r[below] ** (alpha + 1) / (alpha + 1)
    ok = ~below
    if np.any(ok):
        kk = k[ok]
        out[ok] = cum[kk] + gauss_legendre(integrand, knots[kk], r[ok])
    return out


def _callable_M(u, gp, r, alpha):
    def integrand(xi):
        if xi <= 0:
            return 0.0
        return xi**alpha * float(u(level_radius(gp, 1.0 / xi)))

    # local power of the integrand near 0; xi^p with p <= -1 is not integrable
    lo, hi = 1e-12 * r, 1e-8 * r
    f_lo, f_hi = abs(integrand(lo)), abs(integrand(hi))
    if f_lo > 0 and f_hi > 0 and math.log(f_hi / f_lo) / math.log(hi / lo) <= -1.0 + 1e-6:
        return math.inf
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, r, epsabs=0.0, epsrel=1e-12, limit=200)
    return val


def mean_value_M(u, gp, r, alpha=1.0):
    """Averaged mean ``M_r[u](o) = (alpha+1)/r^(alpha+1) int_0^r xi^alpha m_xi[u](o) dxi``.

    ``u`` is a :class:`RadialField` (integrated panel by panel between the
    levels of its interpolation knots; a singular pole part is integrated
    analytically) or a vectorized callable of the radius (adaptive
    quadrature).  Returns ``inf`` when the integral diverges.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise RangeError("mean-value parameter must be positive")
    if isinstance(u, RadialField):
        # range check: the level sphere of the largest r must lie inside the field
        s_max = level_radius(gp, 1.0 / float(np.max(r_arr)))
        if s_max > u.outer_radius * (1 + 1e-12):
            raise RangeError("level sphere leaves the field's grid")
        integral = _field_M(u, gp, r_arr, alpha)
        val = (alpha + 1) / np.atleast_1d(r_arr) ** (alpha + 1) * integral
        if u.pole_mass:
            if u.green is not gp:
                raise ConfigurationError("singular part must use the same Green profile")
            val = val + u.pole_mass * (alpha + 1) / (alpha * np.atleast_1d(r_arr))
        return val.reshape(r_arr.shape) if r_arr.ndim else float(val[0])
    vals = [(alpha + 1) / x ** (alpha + 1) * _callable_M(u, gp, x, alpha) for x in np.atleast_1d(r_arr)]
    return np.array(vals).reshape(r_arr.shape) if r_arr.ndim else vals[0]


def mean_value_M_coarea(u, gp, r, alpha=1.0):
    """``M_r[u](o)`` through the coarea form ``int_{G > 1/r} u G^(-alpha-2) |grad G|^2 dV``.

    Integrates in the radius instead of the level; an independent route
    used to cross-check :func:`mean_value_M`.
    """
    s_r = level_radius(gp, 1.0 / r)
    omega = gp.profile.omega

    def integrand(s):
        if s <= 0:
            return 0.0
        g = float(gp(s))
        return float(_eval_radial(u, s)) * g ** (-alpha - 2) * float(gp.profile.inverse_area(s)) / omega

    pts = None
    if isinstance(u, RadialField):
        # jumps of a cellwise field sit on its edges
        pts = [e for e in u.edges if 0 < e < s_r] or None
    opts = dict(epsabs=0.0, epsrel=1e-11, limit=max(500, 4 * len(pts or ())))
    if pts:
        opts["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(integrand, 0.0, s_r, **opts)
    val *= (alpha + 1) / r ** (alpha + 1)
    if isinstance(u, RadialField) and u.pole_mass:
        val += u.pole_mass * (alpha + 1) / (alpha * r)
    return val


def audit_M_monotonicity(u, gp, alpha, r_samples, tolerance=1e-8):
    """Check that ``r -> M_r[u](o)`` is nonincreasing on ``r_samples``.

    The measured error is the largest positive increment between
    consecutive (sorted) samples.
    """
    r = np.sort(np.asarray(r_samples, dtype=float))
    report = VerificationReport("M_monotonicity", inputs={"alpha": alpha, "samples": r.size},
                                tolerance=tolerance)
    with timed(report):
        vals = np.asarray(mean_value_M(u, gp, r, alpha), dtype=float)
        inc = np.diff(vals)
        worst = float(inc.max()) if inc.size else 0.0
        report.add("max_increment", max(worst, 0.0))
        report.details["r"] = r.tolist()
        report.details["M"] = vals.tolist()
    return report
