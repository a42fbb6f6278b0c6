"""Numerical toolkit for the even Gaussian Minkowski problem."""

from .discrete import DiscreteProblem, SolveOptions, SolveReport, solve_gaussian_minkowski, solve_normalized
from .gauss_core import ball_density, ball_roots, big_phi, gauss_segment_integral, inv_big_phi, phi
from .geometry import Ball, HBody, Polytope2, Polytope3, SymBox, hausdorff_distance, wulff_shape
from .measure import (MeasureVector, QuadratureConfig, facet_measures, gaussian_volume,
                      monte_carlo_volume, total_gaussian_surface_area, variational_check)
from .smooth import DensityProfile, SupportProfile, solve_smooth

__version__ = "0.1.0"

__all__ = [
    "Ball", "DensityProfile", "DiscreteProblem", "HBody", "MeasureVector", "Polytope2", "Polytope3",
    "QuadratureConfig", "SolveOptions", "SolveReport", "SupportProfile", "SymBox", "ball_density",
    "ball_roots", "big_phi", "facet_measures", "gauss_segment_integral", "gaussian_volume",
    "hausdorff_distance", "inv_big_phi", "monte_carlo_volume", "phi", "solve_gaussian_minkowski",
    "solve_normalized", "solve_smooth", "total_gaussian_surface_area", "variational_check",
    "wulff_shape",
]
