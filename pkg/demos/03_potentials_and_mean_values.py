"""
Potentials and mean values over Green level sets
================================================

The potential of a radial measure reduces to a one-dimensional integral
because the average of G(x, .) over a sphere centred at the pole is
g(max(|x|, s)).  Level sets of the Green function {G = 1/r} carry the
mean values m_r and their weighted averages M_r; for superharmonic u the
map r -> M_r[u] is nonincreasing.
"""
import numpy as np

from pmelab import (ManifoldProfile, RadialMeasure, audit_M_monotonicity, mean_value_M,
                    mean_value_m, potential, whole_green)

h3 = ManifoldProfile.hyperbolic(3)
g = whole_green(h3)
edges = np.concatenate([[0.0], np.geomspace(1e-4, 40.0, 1500)])

# A unit atom at the pole plus a uniform shell between radii 1 and 2.
mu = RadialMeasure(1.0, RadialMeasure.shell(1.0, 2.0).density, h3)
u = potential(mu, g, edges)
print("potential at r = 0.5, 1.5, 3:", np.array2string(u(np.array([0.5, 1.5, 3.0])), precision=5))

# For u = g itself the mean values are explicit: m_r = 1/r and M_r = 2/r.
r = np.geomspace(0.1, 10.0, 5)
print("\nr * m_r[g] =", np.array2string(r * mean_value_m(g, g, r), precision=12))
print("r * M_r[g] =", np.array2string(r * mean_value_M(g, g, r), precision=12))

# Superharmonicity shows up as a nonincreasing M_r.
shell_only = potential(RadialMeasure.shell(1.0, 2.0, profile=h3), g, edges)
rs = np.geomspace(0.05, 20.0, 30)
M = mean_value_M(shell_only, g, rs)
print("\nM_r of the shell potential, first and last samples:", M[0], M[-1])
print("value at the pole:", shell_only.regular(0.0))
print(audit_M_monotonicity(shell_only, g, 1.0, rs).summary_line())

# A function that grows with distance is not superharmonic, and the audit says so.
print(audit_M_monotonicity(lambda s: s, g, 1.0, rs).summary_line())
