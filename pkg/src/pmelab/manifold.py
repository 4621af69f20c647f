"""Rotationally symmetric model manifolds M_psi.

The metric is ``ds^2 = d rho^2 + psi(rho)^2 d theta^2`` on ``R^N``; every
geometric quantity needed elsewhere is a function of the warping profile
``psi`` and the dimension ``N``.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import interpolate, special

from ._quadrature import quiet_quad
from .errors import DomainError, InvalidProfileError, RangeError

__all__ = [
    "ManifoldProfile",
    "HypothesisReport",
    "sphere_area",
    "sectional_curvature",
    "ricci_radial",
    "ball_volume",
    "check_hypothesis",
]

KINDS = ("euclidean", "hyperbolic", "exponential_power", "tabulated")


def sphere_area(N):
    """Area of the unit (N-1)-sphere in R^N."""
    return 2.0 * math.pi ** (N / 2.0) / special.gamma(N / 2.0)


def _switch(r):
    """C-infinity transition from 0 (at r <= 0) to 1 (at r >= 1), nondecreasing."""
    r = np.asarray(r, dtype=float)
    x = np.clip(r, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f0 = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        f1 = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
        s = f0 / (f0 + f1)
    return s


def _switch_derivative(r):
    r = np.asarray(r, dtype=float)
    x = np.clip(r, 1e-300, 1.0 - 1e-16)
    inside = (r > 0) & (r < 1)
    # s = 1 / (1 + exp(1/x - 1/(1-x)))
    with np.errstate(over="ignore", invalid="ignore"):
        z = 1.0 / x - 1.0 / (1.0 - x)
        dz = -1.0 / x**2 - 1.0 / (1.0 - x) ** 2
        e = np.exp(-np.abs(z))
        # s' = -dz * exp(z) / (1 + exp(z))^2, written overflow-free
        ds = -dz * e / (1.0 + e) ** 2
    return np.where(inside, np.nan_to_num(ds), 0.0)


@dataclass(frozen=True, eq=False)
class ManifoldProfile:
    """Warping function ``psi`` of a model manifold together with its dimension.

    Use the constructors :meth:`euclidean`, :meth:`hyperbolic`,
    :meth:`exponential_power` and :meth:`tabulated` rather than calling the
    class directly.  Evaluators are vectorized over ``r``.
    """

    kind: str
    N: int
    a: float = 0.0
    table: tuple = field(default=(), repr=False)
    _state: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidProfileError(f"unknown profile kind {self.kind!r}")
        if int(self.N) != self.N or self.N < 2:
            raise InvalidProfileError("dimension N must be an integer >= 2")
        if self.kind == "exponential_power":
            if not 0.0 < self.a <= 2.0:
                raise InvalidProfileError("exponential-power parameter a must lie in (0, 2]")
            self._setup_exponential_power()
        elif self.kind == "tabulated":
            self._setup_table()

    # ------------------------------------------------------------------ constructors
    @classmethod
    def euclidean(cls, N):
        return cls("euclidean", int(N))

    @classmethod
    def hyperbolic(cls, N):
        return cls("hyperbolic", int(N))

    @classmethod
    def exponential_power(cls, N, a):
        """``psi = r exp(H(r))`` with ``H' = a r^(a-1) sigma(r)``.

        ``sigma`` is a smooth nondecreasing switch from 0 to 1 on ``[0, 1]``,
        so ``psi`` is flat-matched to ``r`` at the pole, convex everywhere and
        proportional to ``r exp(r^a)`` for ``r >= 1``.
        """
        return cls("exponential_power", int(N), a=float(a))

    @classmethod
    def tabulated(cls, N, r, psi, dpsi=None, d2psi=None):
        cols = [np.asarray(r, dtype=float), np.asarray(psi, dtype=float)]
        for extra in (dpsi, d2psi):
            if extra is not None:
                cols.append(np.asarray(extra, dtype=float))
        if d2psi is not None and dpsi is None:
            raise InvalidProfileError("psi'' column requires a psi' column")
        return cls("tabulated", int(N), table=tuple(tuple(c) for c in cols))

    @classmethod
    def from_table_file(cls, path, N):
        """Read a whitespace or comma separated table with columns r, psi[, psi', psi'']."""
        with open(path) as fh:
            text = fh.read().replace(",", " ")
        data = np.loadtxt(text.splitlines(), ndmin=2)
        if data.shape[1] not in (2, 3, 4):
            raise InvalidProfileError("profile table needs 2 to 4 columns")
        cols = [data[:, k] for k in range(data.shape[1])]
        return cls.tabulated(N, *cols)

    # ------------------------------------------------------------------ setup helpers
    def _setup_exponential_power(self):
        a = self.a
        # H(1) = 1 - delta; H(r) = r^a - delta for r >= 1
        integral, _ = quiet_quad(lambda s: a * s ** (a - 1) * _switch(s), 0.0, 1.0,
                                 epsabs=0.0, epsrel=1e-13, limit=200)
        self._state["delta"] = 1.0 - integral

    def _setup_table(self):
        cols = [np.asarray(c, dtype=float) for c in self.table]
        r, psi = cols[0], cols[1]
        if r.ndim != 1 or r.size < 4:
            raise InvalidProfileError("profile table needs at least 4 rows")
        if np.any(np.diff(r) <= 0):
            raise InvalidProfileError("table radii must be strictly increasing")
        if r[0] < 0:
            raise InvalidProfileError("table radii must be nonnegative")
        if r[0] == 0 and psi[0] != 0:
            raise InvalidProfileError("psi(0) must vanish")
        if np.any(psi[r > 0] <= 0) or not np.all(np.isfinite(psi)):
            raise InvalidProfileError("psi must be strictly positive for r > 0")
        if len(cols) == 2:
            interp = interpolate.PchipInterpolator(r, psi, extrapolate=False)
            self._state["psi"] = interp
            self._state["dpsi"] = interp.derivative(1)
            self._state["d2psi"] = interp.derivative(2)
        else:
            interp = interpolate.CubicHermiteSpline(r, psi, cols[2], extrapolate=False)
            self._state["psi"] = interp
            self._state["dpsi"] = interp.derivative(1)
            if len(cols) == 4:
                self._state["d2psi"] = lambda x, _r=r, _v=cols[3]: np.interp(x, _r, _v)
            else:
                self._state["d2psi"] = interp.derivative(2)
        self._state["r_min"] = r[0]
        self._state["r_max"] = r[-1]

    # ------------------------------------------------------------------ basic data
    @property
    def omega(self):
        """Area of the unit (N-1)-sphere."""
        return sphere_area(self.N)

    @property
    def r_max(self):
        return self._state.get("r_max", math.inf)

    @property
    def is_analytic(self):
        return self.kind != "tabulated"

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "tabulated":
            lo, hi = self._state["r_min"], self._state["r_max"]
            if np.any(r > hi * (1 + 1e-12)) or np.any(r < lo):
                raise RangeError(f"radius outside tabulated range [{lo}, {hi}]")
            r = np.clip(r, lo, hi)
        return r

    def _H(self, r):
        """Exponent H(r) of the exponential-power profile."""
        a, delta = self.a, self._state["delta"]
        r = np.asarray(r, dtype=float)
        out = np.where(r >= 1.0, r**a - delta, 0.0)
        inner = (r > 0) & (r < 1)
        if np.any(inner):
            x, w = np.polynomial.legendre.leggauss(40)
            ri = r[inner]
            # integrate over [0, r] in four equal panels
            total = np.zeros_like(ri)
            for k in range(4):
                lo, hi = ri * k / 4.0, ri * (k + 1) / 4.0
                half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
                s = mid[:, None] + half[:, None] * x
                total += half * np.sum(w * a * s ** (a - 1) * _switch(s), axis=1)
            out = np.array(out, dtype=float)
            out[inner] = total
        return out

    def _dH(self, r):
        r = np.asarray(r, dtype=float)
        x = np.where(r > 0, r, 1.0)
        return np.where(r > 0, self.a * x ** (self.a - 1) * _switch(x), 0.0)

    def log_psi(self, r):
        """``log psi(r)``; stays finite where ``psi`` itself would overflow."""
        r = self._check(r)
        with np.errstate(divide="ignore"):
            if self.kind == "euclidean":
                return np.log(r)
            if self.kind == "hyperbolic":
                # log sinh r = r + log((1 - exp(-2r)) / 2)
                small = r < 1.0
                return np.where(small, np.log(np.sinh(np.where(small, r, 1.0))),
                                r + np.log1p(-np.exp(-2.0 * r)) - math.log(2.0))
            if self.kind == "exponential_power":
                return np.log(r) + self._H(r)
            return np.log(self._state["psi"](r))

    def psi(self, r):
        r = self._check(r)
        if self.kind == "euclidean":
            return np.asarray(r, dtype=float) * 1.0
        if self.kind == "hyperbolic":
            return np.sinh(r)
        if self.kind == "exponential_power":
            with np.errstate(over="ignore"):
                return r * np.exp(self._H(r))
        return self._state["psi"](r)

    def dpsi(self, r):
        r = self._check(r)
        if self.kind == "euclidean":
            return np.ones_like(np.asarray(r, dtype=float))
        if self.kind == "hyperbolic":
            return np.cosh(r)
        if self.kind == "exponential_power":
            hp = self._dH(r)
            with np.errstate(over="ignore"):
                return np.exp(self._H(r)) * (1.0 + r * hp)
        return self._state["dpsi"](r)

    def d2psi(self, r):
        r = self._check(r)
        if self.kind == "euclidean":
            return np.zeros_like(np.asarray(r, dtype=float))
        if self.kind == "hyperbolic":
            return np.sinh(r)
        if self.kind == "exponential_power":
            return self.psi(r) * self.curvature_ratio(r)
        return self._state["d2psi"](r)

    def curvature_ratio(self, r):
        """``psi''/psi``, computed without forming psi for the analytic kinds."""
        r = self._check(r)
        if self.kind == "euclidean":
            return np.zeros_like(np.asarray(r, dtype=float))
        if self.kind == "hyperbolic":
            return np.ones_like(np.asarray(r, dtype=float))
        if self.kind == "exponential_power":
            a = self.a
            r = np.asarray(r, dtype=float)
            # H is flat at 0 (the switch vanishes to all orders), so psi''/psi -> 0
            x = np.where(r > 0, r, 1.0)
            s, ds = _switch(x), _switch_derivative(x)
            hp = a * x ** (a - 1) * s
            hpp = a * (a - 1) * x ** (a - 2) * s + a * x ** (a - 1) * ds
            # psi''/psi = 2H'/r + H'' + H'^2
            return np.where(r > 0, 2.0 * hp / x + hpp + hp**2, 0.0)
        return self.d2psi(r) / self.psi(r)

    def area_density(self, r):
        """Area of the geodesic sphere of radius r: ``omega_N psi^(N-1)``."""
        with np.errstate(over="ignore"):
            return self.omega * np.exp((self.N - 1) * self.log_psi(r))

    def inverse_area(self, r):
        """``psi(r)^(1-N)`` (the Green-function integrand)."""
        return np.exp((1 - self.N) * self.log_psi(r))

    def mean_curvature(self, r):
        """Radial Laplacian drift ``(N-1) psi'/psi``."""
        r = self._check(r)
        if self.kind == "euclidean":
            return (self.N - 1) / r
        if self.kind == "hyperbolic":
            return (self.N - 1) / np.tanh(r)
        if self.kind == "exponential_power":
            hp = self.a * r ** (self.a - 1) * _switch(r)
            return (self.N - 1) * (1.0 / r + hp)
        return (self.N - 1) * self.dpsi(r) / self.psi(r)

    def volume_between(self, a, b):
        """Volume of the shells ``a <= rho <= b`` (vectorized, 16-point GL in log r)."""
        from ._quadrature import gauss_legendre

        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return gauss_legendre(self.area_density, a, b)


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of the Cartan-Hadamard / Ricci-growth / nonparabolicity checks."""

    is_cartan_hadamard: bool
    ricci_bound_constant: float
    is_nonparabolic: bool
    green_tail_integral: float
    heuristic: bool = False
    notes: tuple = ()

    @property
    def ricci_bounded(self):
        return math.isfinite(self.ricci_bound_constant)

    @property
    def satisfies_H(self):
        return self.is_cartan_hadamard and self.ricci_bounded

    def as_dict(self):
        return {
            "is_cartan_hadamard": self.is_cartan_hadamard,
            "ricci_bound_constant": "unbounded" if not self.ricci_bounded else self.ricci_bound_constant,
            "is_nonparabolic": self.is_nonparabolic,
            "green_tail_integral": "inf" if math.isinf(self.green_tail_integral) else self.green_tail_integral,
            "heuristic": self.heuristic,
            "notes": list(self.notes),
        }


def _positive_radius(profile, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    return profile._check(r)


def sectional_curvature(profile, r):
    """Sectional curvature ``-psi''/psi`` of radial 2-planes at distance ``r`` from the pole."""
    r = _positive_radius(profile, r)
    return -profile.curvature_ratio(r)


def ricci_radial(profile, r):
    """Radial Ricci curvature ``-(N-1) psi''/psi``."""
    r = _positive_radius(profile, r)
    return -(profile.N - 1) * profile.curvature_ratio(r)


def ball_volume(profile, R):
    """Volume ``omega_N int_0^R psi^(N-1)`` of the geodesic ball about the pole."""
    if R < 0:
        raise DomainError("ball radius must be nonnegative")
    if R == 0:
        return 0.0
    profile._check(R)
    N = profile.N
    f = lambda s: math.exp((N - 1) * float(profile.log_psi(s))) if s > 0 else 0.0
    pts = [1.0] if profile.kind == "exponential_power" and R > 1.0 else None
    val, _ = quiet_quad(f, 0.0, R, epsabs=1e-14, epsrel=1e-12, limit=400, points=pts)
    return profile.omega * val


def _tail_integral(profile, lower=1.0):
    """``int_lower^inf psi^(1-N)`` and whether the verdict is heuristic."""
    N = profile.N
    if profile.kind == "euclidean":
        return (lower ** (2 - N) / (N - 2) if N > 2 else math.inf), False
    if profile.kind == "tabulated":
        return _tabulated_tail(profile, lower), True
    # hyperbolic and exponential-power tails converge for every N >= 2
    f = lambda s: float(profile.inverse_area(s))
    val, _ = quiet_quad(f, lower, math.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val, False


def tail_slope(profile):
    """Log-log slope of ``psi^(1-N)`` over the last decade of a tabulated profile."""
    r_hi = profile.r_max
    r_lo = max(r_hi / 10.0, profile._state["r_min"], r_hi / 2.0 if r_hi < 10 else 0.0)
    rr = np.geomspace(max(r_lo, 1e-12), r_hi, 41)
    y = np.log(profile.inverse_area(rr))
    return np.polyfit(np.log(rr), y, 1)[0]


def _tabulated_tail(profile, lower):
    r_hi = profile.r_max
    if lower >= r_hi:
        raise RangeError("tail start lies beyond the tabulated range")
    val, _ = quiet_quad(lambda s: float(profile.inverse_area(s)), lower, r_hi,
                        epsabs=0.0, epsrel=1e-10, limit=400)
    p = tail_slope(profile)
    if p >= -1.0:
        return math.inf
    return val + r_hi * float(profile.inverse_area(r_hi)) / (-p - 1.0)


def check_hypothesis(profile, r_max, samples=2001):
    """Check hypothesis (H) and nonparabolicity of a model manifold on ``(0, r_max]``.

    The Ricci constant reported is the smallest ``C`` with
    ``Ric_o(r) >= -C (1 + r^2)`` on the sampled grid; it is reported as
    infinite when the ratio still grows over the last decade of the grid.
    """
    if r_max <= 0:
        raise DomainError("r_max must be positive")
    if profile.kind == "tabulated":
        r_max = min(r_max, profile.r_max)
        # psi''/psi on the first table interval is interpolation error over a vanishing psi
        lo = max(profile.table[0][1], r_max * 1e-6)
        psi = profile.psi(np.linspace(lo, r_max, samples))
        if np.any(psi <= 0):
            raise InvalidProfileError("tabulated psi is not positive")
    else:
        lo = r_max * 1e-6
    rr = np.geomspace(lo, r_max, samples)
    d2 = profile.curvature_ratio(rr)
    is_ch = bool(np.all(d2 >= -1e-12))
    ratio = (profile.N - 1) * d2 / (1.0 + rr**2)
    C = max(0.0, float(ratio.max()))
    tail = rr >= r_max / 10.0
    if np.count_nonzero(tail) >= 3 and np.all(ratio[tail] > 0):
        slope = np.polyfit(np.log(rr[tail]), np.log(ratio[tail]), 1)[0]
        if slope > 0.1 and ratio[tail][-1] >= 0.95 * ratio[tail].max():
            C = math.inf
    tail_int, heuristic = _tail_integral(profile, 1.0 if profile.r_max > 1.0 else profile.r_max / 2)
    notes = []
    if profile.kind == "tabulated":
        notes.append("model-only validity: radial Ricci bound checked for the model metric")
        notes.append("nonparabolicity decided by last-decade log-log slope extrapolation")
        notes.append("curvature sampled from the second table node outward")
    return HypothesisReport(
        is_cartan_hadamard=is_ch,
        ricci_bound_constant=C,
        is_nonparabolic=math.isfinite(tail_int),
        green_tail_integral=tail_int,
        heuristic=heuristic,
        notes=tuple(notes),
    )
