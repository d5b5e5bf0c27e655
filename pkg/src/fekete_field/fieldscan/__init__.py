"""Potential evaluation, segment profiles, flux recovery and level sets."""
from .flux import FluxResult, fibonacci_sphere, gauss_flux, yukawa_flux
from .levelset import (ScalarFieldGrid, jagged_bbox, jagged_sandwich_check, jagged_source,
                       label_grid, level_components, sample_grid)
from .profile import (SegmentProfile, curve_to_csv, gap_profile, oscillation,
                      oscillation_curve, segment_profile, symmetric_two_balls)
from .sources import (PointSet, Sum, TwoBallSystem, UniformSphere, coulomb_gradient,
                      coulomb_potential, point_source, yukawa_gradient, yukawa_potential)
from .trajectory import magnetic_trajectory

__all__ = [
    "FluxResult", "PointSet", "ScalarFieldGrid", "SegmentProfile", "Sum", "TwoBallSystem",
    "UniformSphere", "coulomb_gradient", "coulomb_potential", "curve_to_csv",
    "fibonacci_sphere", "gap_profile", "gauss_flux", "jagged_bbox", "jagged_sandwich_check",
    "jagged_source", "label_grid", "level_components", "magnetic_trajectory", "oscillation",
    "oscillation_curve", "point_source", "sample_grid", "segment_profile",
    "symmetric_two_balls", "yukawa_flux", "yukawa_gradient", "yukawa_potential",
]
