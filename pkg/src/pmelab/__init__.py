"""Porous medium flow and potential theory on radial model manifolds.

A model manifold is described by its warping function ``psi``.  The
package computes its Green function, Green potentials of radial measures
and their mean values over Green level sets, and solves the porous medium
equation ``u_t = Laplacian(u^m)`` on geodesic balls with measure data.
"""
from .barenblatt import ZKB, smoothing_exponents
from .errors import (ConfigurationError, DomainError, InsufficientDataError, InvalidProfileError,
                     NotNonparabolicError, PmeLabError, RangeError, StepFailure)
from .green import GreenProfile, ball_green, green_ball, green_radial, level_radius, whole_green
from .manifold import (HypothesisReport, ManifoldProfile, ball_volume, check_hypothesis,
                       ricci_radial, sectional_curvature, sphere_area)
from .potential import (RadialField, RadialMeasure, audit_M_monotonicity, mean_value_M,
                        mean_value_M_coarea, mean_value_m, potential, potential_at,
                        potential_energy_identity)
from .report import VerificationReport
from .solver import (RadialGrid, SolverConfig, Trajectory, build_grid, mollify_measure,
                     smoothing_exponent_fit, solve_ball, solve_cauchy, step_implicit)

__version__ = "0.1.0"

__all__ = [
    "ZKB", "smoothing_exponents",
    "ConfigurationError", "DomainError", "InsufficientDataError", "InvalidProfileError",
    "NotNonparabolicError", "PmeLabError", "RangeError", "StepFailure",
    "GreenProfile", "ball_green", "green_ball", "green_radial", "level_radius", "whole_green",
    "HypothesisReport", "ManifoldProfile", "ball_volume", "check_hypothesis", "ricci_radial",
    "sectional_curvature", "sphere_area",
    "RadialField", "RadialMeasure", "audit_M_monotonicity", "mean_value_M", "mean_value_M_coarea",
    "mean_value_m", "potential", "potential_at", "potential_energy_identity",
    "VerificationReport",
    "RadialGrid", "SolverConfig", "Trajectory", "build_grid", "mollify_measure",
    "smoothing_exponent_fit", "solve_ball", "solve_cauchy", "step_implicit",
]
