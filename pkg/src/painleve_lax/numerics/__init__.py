"""Floating-point checks: P2 flow, canonical solutions, the integral transform, Stokes data."""

from .asymptotics import FormalSeries, formal_series
from .canonical import CanonicalSolution, SeedAccuracyWarning, canonical_solution, sector, seed_rays
from .contour import (BadOpening, Contour, MuOutsideWedge, admissible_k, build_contour,
                      build_split_contour, ray_angle, wedge)
from .export import canonical_table, read_table, transform_table
from .p2flow import NumericsError, P2State, StepFailure, integrate_p2, p2_trajectory
from .stokes import (StokesData, TemplateViolation, airy_stokes, formal_monodromy, isomonodromy_drift,
                     stokes_matrices)
from .transform import (QuadratureFailure, TailNotDecaying, TheoremReport, integral_transform,
                        mu_transfer, t_transfer, verify_theorem31)

__all__ = [
    "FormalSeries", "formal_series", "CanonicalSolution", "SeedAccuracyWarning", "canonical_solution",
    "sector", "seed_rays", "BadOpening", "Contour", "MuOutsideWedge", "admissible_k", "build_contour",
    "build_split_contour", "ray_angle", "wedge", "NumericsError", "P2State", "StepFailure",
    "integrate_p2", "p2_trajectory", "StokesData", "TemplateViolation", "airy_stokes",
    "formal_monodromy", "isomonodromy_drift", "stokes_matrices", "QuadratureFailure",
    "TailNotDecaying", "TheoremReport", "integral_transform", "mu_transfer", "t_transfer",
    "verify_theorem31", "canonical_table", "read_table", "transform_table",
]
