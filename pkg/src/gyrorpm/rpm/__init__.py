"""Regions of possible motion: fibers, maps, level-curve tracing, boundaries."""

from .boundary import generalized_boundary
from .fibers import FiberBatch, FiberSolutionSet, admissible_velocities, fiber_counts, q_factor
from .icosphere import SphereMesh, icosphere, level_for_resolution
from .mapping import RpmComponent, RpmReport, rpm_map
from .tracing import trace_omega_curve

__all__ = [
    "FiberBatch",
    "FiberSolutionSet",
    "RpmComponent",
    "RpmReport",
    "SphereMesh",
    "admissible_velocities",
    "fiber_counts",
    "generalized_boundary",
    "icosphere",
    "level_for_resolution",
    "q_factor",
    "rpm_map",
    "trace_omega_curve",
]
