"""
Green functions with a pole at the origin
=========================================

On a model manifold the Green function only depends on the distance to
the pole, g(r) = (1/omega) * int_r^inf psi^(1-N).  It is finite exactly when
that integral converges.
"""
import numpy as np

from pmelab import ManifoldProfile, NotNonparabolicError, ball_green, whole_green

e3, h3 = ManifoldProfile.euclidean(3), ManifoldProfile.hyperbolic(3)
g_e3, g_h3 = whole_green(e3), whole_green(h3)

r = np.geomspace(0.01, 10.0, 6)
print(f"{'r':>8} {'g_R3':>12} {'1/(4 pi r)':>12} {'g_H3':>12} {'(coth r - 1)/(4 pi)':>20}")
for x in r:
    print(f"{x:8.3g} {g_e3(x):12.6g} {1 / (4 * np.pi * x):12.6g} {g_h3(x):12.6g} "
          f"{(1 / np.tanh(x) - 1) / (4 * np.pi):20.6g}")

# Negative curvature makes g decay exponentially, which is the room the
# porous medium flow needs to have a finite Green-Barenblatt integral.
g_exp = whole_green(ManifoldProfile.exponential_power(3, 1.0))
print("\nexp-power a=1 at r = 1, 2, 4:", np.array2string(g_exp(np.array([1.0, 2.0, 4.0])), precision=4))

# Balls: the Dirichlet Green function of B_R increases to g as R grows.
x = np.array([0.5, 1.0, 2.0])
for R in (4.0, 8.0, 16.0):
    gap = g_h3(x) - ball_green(h3, R)(x)
    print(f"H^3, R = {R:4.0f}: g - G_R =", np.array2string(gap, precision=3))

# The plane is parabolic: there is no positive Green function.
try:
    whole_green(ManifoldProfile.euclidean(2))
except NotNonparabolicError as exc:
    print("\nR^2:", exc)
