"""Zel'dovich-Kompaneets-Barenblatt (ZKB) self-similar solutions on R^N.

    u(x, t) = t^(-alpha) (C - k |x|^2 t^(-2 gamma))_+^(1/(m-1)),
    alpha = N / ((m-1) N + 2),  gamma = alpha / N,  k = (m-1) alpha / (2 m N),

with ``C`` fixed by the mass.  These solve ``u_t = Laplacian(u^m)`` with
initial datum ``mass * delta_0``.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from .manifold import sphere_area


def smoothing_exponents(N, m):
    """Decay exponents ``(alpha, beta)`` of the L^1 -> L^inf smoothing effect."""
    d = (m - 1.0) * N + 2.0
    return N / d, 2.0 / d


@dataclass(frozen=True)
class ZKB:
    N: int
    m: float
    mass: float = 1.0

    @property
    def alpha(self):
        return smoothing_exponents(self.N, self.m)[0]

    @property
    def beta(self):
        return smoothing_exponents(self.N, self.m)[1]

    @property
    def gamma(self):
        """Spatial spreading exponent: the support radius grows like ``t^gamma``."""
        return self.alpha / self.N

    @property
    def k(self):
        return (self.m - 1.0) * self.alpha / (2.0 * self.m * self.N)

    @property
    def C(self):
        N, m, k = self.N, self.m, self.k
        p = 1.0 / (m - 1.0)
        B = special.beta(N / 2.0, p + 1.0)
        return (2.0 * self.mass * k ** (N / 2.0) / (sphere_area(N) * B)) ** (1.0 / (p + N / 2.0))

    def __call__(self, r, t):
        r = np.asarray(r, dtype=float)
        base = self.C - self.k * r**2 * t ** (-2.0 * self.gamma)
        return t ** (-self.alpha) * np.maximum(base, 0.0) ** (1.0 / (self.m - 1.0))

    def front(self, t):
        """Radius of the free boundary at time ``t``."""
        return math.sqrt(self.C / self.k) * t**self.gamma

    def peak(self, t):
        return t ** (-self.alpha) * self.C ** (1.0 / (self.m - 1.0))
