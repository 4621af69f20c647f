"""
Model manifolds and their curvature
===================================

A rotationally symmetric manifold is fixed by its warping function psi:
the metric is dr^2 + psi(r)^2 dtheta^2.  Here we compare flat space,
hyperbolic space and an exponential-power profile whose curvature grows
without bound at a controlled rate.
"""
import numpy as np

from pmelab import ManifoldProfile, ball_volume, check_hypothesis, ricci_radial, sectional_curvature

profiles = {
    "R^3": ManifoldProfile.euclidean(3),
    "H^3": ManifoldProfile.hyperbolic(3),
    "exp-power a=1": ManifoldProfile.exponential_power(3, 1.0),
    "exp-power a=2": ManifoldProfile.exponential_power(3, 2.0),
}

# Radial sectional curvature -psi''/psi and the radial Ricci curvature.
r = np.array([0.5, 1.0, 2.0, 4.0])
print("radial sectional curvature at r =", r)
for name, p in profiles.items():
    print(f"  {name:14s}", np.array2string(sectional_curvature(p, r), precision=3))

print("\nradial Ricci curvature")
for name, p in profiles.items():
    print(f"  {name:14s}", np.array2string(ricci_radial(p, r), precision=3))

# Ball volumes grow polynomially in flat space and exponentially (or faster)
# once the curvature is negative.
print("\nvolume of the ball of radius 3")
for name, p in profiles.items():
    print(f"  {name:14s} {ball_volume(p, 3.0):.6g}")

# The curvature hypothesis asks for a Cartan-Hadamard model whose Ricci
# curvature is bounded below by -C(1 + r^2).
print("\ncurvature hypothesis on [0, 6]")
for name, p in profiles.items():
    rep = check_hypothesis(p, 6.0)
    print(f"  {name:14s} satisfied={rep.satisfies_H}  C={rep.ricci_bound_constant:.3g}")
