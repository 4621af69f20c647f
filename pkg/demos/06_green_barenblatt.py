"""
Integrating the source solution in time recovers the Green function
===================================================================

For the porous medium flow started from a unit point mass, the time
integral of u^m at a point equals the Green function there, provided the
manifold is nonparabolic.  In the plane the same integral grows without
bound, roughly by ln(10)/(8 pi) per decade.
"""
from pmelab import ManifoldProfile
from pmelab.verify import verify_green_barenblatt

for name, profile, T, R in [("R^3", ManifoldProfile.euclidean(3), 1e6, None),
                            ("H^3", ManifoldProfile.hyperbolic(3), 1e5, None),
                            ("R^2", ManifoldProfile.euclidean(2), 1e6, 64.0)]:
    rep = verify_green_barenblatt(profile, T_max=T, R=R)
    print(f"\n{name}: {rep.summary_line()}")
    for label, err, tol in rep.errors:
        print(f"  {label:36s} {err:10.3e}  (tolerance {tol:g})")
