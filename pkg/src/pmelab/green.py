"""Radial Green function of -Laplacian with pole at the origin of a model manifold.

On a model manifold the Green function with pole ``o`` only depends on the
distance ``r`` to the pole:

    G(r)   = (1/omega_N) int_r^inf psi^(1-N)(s) ds      (whole manifold)
    G_R(r) = (1/omega_N) int_r^R   psi^(1-N)(s) ds      (ball, Dirichlet at R)

Both are evaluated from an antiderivative table built once per profile,
plus a short Gauss-Legendre remainder, so arrays of radii are cheap.
"""
import math
import weakref

import numpy as np

from ._quadrature import log_gauss_legendre, quiet_quad
from .errors import DomainError, NotNonparabolicError, RangeError
from .manifold import _tail_integral, tail_slope
from .report import VerificationReport, timed

__all__ = [
    "GreenProfile",
    "green_radial",
    "green_ball",
    "green_upper_bound_check",
    "level_radius",
    "whole_green",
    "ball_green",
]

_NODE_RATIO = 1.05
_R_FLOOR = 1e-12
_LOG_UNDERFLOW = 700.0
_BISECT_RTOL = 1e-13


class GreenProfile:
    """Radial Green function ``g`` of the pole, on the whole manifold or on a ball.

    Parameters
    ----------
    profile : ManifoldProfile
    R : float or None
        Ball radius for the Dirichlet Green function ``G_R``; ``None`` for
        the minimal Green function ``G`` of the whole manifold.
    """

    def __init__(self, profile, R=None):
        self.profile = profile
        self.R = None if R is None else float(R)
        N = profile.N
        if self.R is not None:
            if self.R <= 0:
                raise DomainError("ball radius must be positive")
            profile._check(self.R)
        else:
            tail, _ = _tail_integral(profile, profile.r_max / 2 if profile.kind == "tabulated" else 1.0)
            if not math.isfinite(tail):
                raise NotNonparabolicError("manifold is parabolic: the Green function is infinite")
        lo = _R_FLOOR
        if profile.kind == "tabulated":
            lo = max(lo, profile._state["r_min"])
        self._t0 = lo
        hi = self.R if self.R is not None else self._far_radius()
        n = max(2, int(math.ceil(math.log(hi / lo) / math.log(_NODE_RATIO))) + 1)
        nodes = np.geomspace(lo, hi, n)
        nodes[-1] = hi
        panels = self._panel_integrals(nodes)
        tail_end = self._tail_beyond(hi)
        cum = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]]) + tail_end
        self._nodes = nodes
        self._cum = cum  # int_{nodes[k]}^{end} psi^(1-N), tail included
        self._tail_end = tail_end
        # psi ~ kappa^(-1/(N-1)) s below the first node
        self._kappa = math.exp((N - 1) * (math.log(lo) - float(profile.log_psi(lo))))
        self.omega = profile.omega

    # ---------------------------------------------------------------- construction
    def _far_radius(self):
        p = self.profile
        if p.kind == "tabulated":
            return p.r_max
        if p.kind == "euclidean":
            return 1e6
        t = 1.0
        while t < 1e8:
            if (p.N - 1) * float(p.log_psi(t)) - math.log(t) > _LOG_UNDERFLOW:
                break
            t *= 1.5
        return t

    def _panel_integrals(self, nodes):
        f = self.profile.inverse_area
        a, b = nodes[:-1], nodes[1:]
        coarse = log_gauss_legendre(f, a, b)
        fine = log_gauss_legendre(f, a, b, order=24)
        bad = np.abs(coarse - fine) > 1e-13 * np.abs(fine)
        for k in np.flatnonzero(bad):
            fine[k], _ = quiet_quad(lambda s: float(f(s)), a[k], b[k], epsabs=0.0, epsrel=1e-13, limit=200)
        return fine

    def _tail_beyond(self, t):
        p, N = self.profile, self.profile.N
        if self.R is not None:
            return 0.0
        if p.kind == "euclidean":
            return t ** (2 - N) / (N - 2)
        if p.kind == "tabulated":
            slope = tail_slope(p)
            if slope >= -1.0:
                raise NotNonparabolicError("manifold is parabolic: the Green function is infinite")
            return t * float(p.inverse_area(t)) / (-slope - 1.0)
        # Laplace estimate; the integrand is below exp(-700) here
        return float(p.inverse_area(t) / p.mean_curvature(t))

    # ---------------------------------------------------------------- evaluation
    @property
    def is_ball(self):
        return self.R is not None

    @property
    def outer_radius(self):
        return self.R if self.R is not None else self._nodes[-1]

    def _integral_from(self, r):
        """``int_r^{end} psi^(1-N)`` for an array of radii inside the table range."""
        r = np.asarray(r, dtype=float)
        out = np.empty_like(r)
        nodes, cum, N = self._nodes, self._cum, self.profile.N
        below = r < nodes[0]
        above = r > nodes[-1]
        mid = ~(below | above)
        if np.any(mid):
            rm = r[mid]
            j = np.clip(np.searchsorted(nodes, rm, side="left"), 0, len(nodes) - 1)
            out[mid] = cum[j] + log_gauss_legendre(self.profile.inverse_area, rm, nodes[j])
        if np.any(below):
            rb, t0 = r[below], nodes[0]
            if N == 2:
                piece = np.log(t0 / rb)
            else:
                piece = (rb ** (2 - N) - t0 ** (2 - N)) / (N - 2)
            out[below] = cum[0] + self._kappa * piece
        if np.any(above):
            ra = r[above]
            if self.profile.kind == "euclidean":
                out[above] = ra ** (2 - N) / (N - 2)
            else:
                out[above] = [self._tail_beyond(x) for x in ra]
        return out

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise DomainError("Green function is evaluated at r > 0 only")
        if self.R is not None and np.any(r > self.R * (1 + 1e-14)):
            raise DomainError("radius lies outside the ball")
        if self.profile.kind == "tabulated" and np.any(r > self.profile.r_max):
            raise RangeError("radius beyond the tabulated profile")
        if self.R is not None:
            r = np.minimum(r, self.R)
        val = self._integral_from(r) / self.omega
        return val if val.ndim else float(val)

    def derivative(self, r):
        """Exact ``g'(r) = -psi^(1-N)(r) / omega_N``."""
        return -self.profile.inverse_area(r) / self.omega

    def level_radius(self, level):
        return level_radius(self, level)

    def __repr__(self):
        dom = "whole manifold" if self.R is None else f"ball R={self.R:g}"
        return f"GreenProfile({self.profile.kind}, N={self.profile.N}, {dom})"


_WHOLE = weakref.WeakKeyDictionary()
_BALLS = weakref.WeakKeyDictionary()


def whole_green(profile):
    """Cached whole-manifold :class:`GreenProfile` of ``profile``."""
    gp = _WHOLE.get(profile)
    if gp is None:
        gp = _WHOLE[profile] = GreenProfile(profile)
    return gp


def ball_green(profile, R):
    """Cached Dirichlet :class:`GreenProfile` of the ball ``B_R``."""
    cache = _BALLS.setdefault(profile, {})
    gp = cache.get(float(R))
    if gp is None:
        gp = cache[float(R)] = GreenProfile(profile, R)
    return gp


def green_radial(profile, r):
    """Minimal Green function ``G(r)`` of the whole manifold, pole at the origin."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("Green function is evaluated at r > 0 only")
    return whole_green(profile)(r)


def green_ball(profile, R, r):
    """Dirichlet Green function ``G_R(r)`` of the geodesic ball of radius ``R``."""
    r = np.asarray(r, dtype=float)
    if np.any(r > R):
        raise DomainError("r must not exceed the ball radius")
    if np.any(r <= 0):
        raise DomainError("Green function is evaluated at r > 0 only")
    return ball_green(profile, R)(r)


def level_radius(gp, level):
    """Radius ``s`` with ``g(s) = level``, by bisection in ``log s``.

    Works elementwise on arrays.  Levels outside the range of ``g`` raise
    :class:`RangeError`.
    """
    lvl = np.asarray(level, dtype=float)
    scalar = lvl.ndim == 0
    lvl = np.atleast_1d(lvl)
    if np.any(~np.isfinite(lvl)) or np.any(lvl < 0) or (not gp.is_ball and np.any(lvl <= 0)):
        raise RangeError("level outside the range of the Green function")
    target = lvl * gp.omega
    nodes, cum, N = gp._nodes, gp._cum, gp.profile.N
    out = np.empty_like(lvl)

    zero = target == 0
    out[zero] = gp.R if gp.is_ball else np.nan

    high = target > cum[0]
    if np.any(high):
        excess = (target[high] - cum[0]) / gp._kappa
        t0 = nodes[0]
        if N == 2:
            out[high] = t0 * np.exp(-excess)
        else:
            out[high] = (excess * (N - 2) + t0 ** (2 - N)) ** (1.0 / (2 - N))

    low = (target < cum[-1]) & ~zero
    if np.any(low):
        if gp.profile.kind == "euclidean" and not gp.is_ball:
            out[low] = (target[low] * (N - 2)) ** (1.0 / (2 - N))
        else:
            raise RangeError("level below the resolved range of the Green function")

    mid = ~(high | low | zero)
    if np.any(mid):
        tm = target[mid]
        # cum is decreasing: find j with cum[j] >= t >= cum[j+1]
        j = np.clip(len(cum) - np.searchsorted(cum[::-1], tm, side="left") - 1, 0, len(nodes) - 2)
        lo = np.log(nodes[j])
        hi = np.log(nodes[j + 1])
        base = cum[j + 1]
        right = nodes[j + 1]
        f = gp.profile.inverse_area
        while np.max(hi - lo) > _BISECT_RTOL:
            x = 0.5 * (lo + hi)
            val = base + log_gauss_legendre(f, np.exp(x), right)
            above = val > tm  # g(exp(x)) too large: root lies further out
            lo = np.where(above, x, lo)
            hi = np.where(above, hi, x)
        out[mid] = np.exp(0.5 * (lo + hi))
    return float(out[0]) if scalar else out


def green_upper_bound_check(profile, samples, tolerance=1e-9):
    """Check ``G(r) <= r^(2-N) / ((N-2) omega_N)`` at the sample radii.

    The constant is the one saturated by Euclidean space.  Measured errors
    are the relative excesses ``ratio - 1``.
    """
    if profile.N < 3:
        raise DomainError("the upper bound is stated for N >= 3")
    report = VerificationReport("green_upper_bound", inputs={"profile": profile.kind, "N": profile.N},
                                tolerance=tolerance)
    with timed(report):
        r = np.asarray(samples, dtype=float)
        bound = r ** (2 - profile.N) / ((profile.N - 2) * profile.omega)
        ratios = np.atleast_1d(green_radial(profile, r) / bound)
        for rk, q in zip(np.atleast_1d(r), ratios):
            report.add(f"excess@r={rk:.6g}", q - 1.0)
        report.details["max_ratio"] = float(ratios.max())
        report.details["ratios"] = ratios.tolist()
    return report
