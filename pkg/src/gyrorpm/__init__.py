"""Regions of possible motion of the free gyrostat.

Numerical machinery for the projections of the integral levels of the
free gyrostat onto the Poisson sphere: first integrals and dynamics,
the bifurcation diagram with its four-region classifier, admissible
velocity fibers, level-curve tracing, generalized (visible-contour)
boundaries and the rank criterion that characterizes them.
"""

from .bifurcation import (
    Branch,
    RegionLabel,
    branch_high,
    branch_low,
    classify,
    critical_curve,
    curve_samples,
    distance_to_bifurcation_set,
    jk_type,
    torus_count,
    wedge_intervals,
)
from .contour import FiberJacobian, contour_condition, fiber_jacobian, rank_defect
from .core import (
    GyrostatParams,
    IntegralConstants,
    SphereCurve,
    State,
    angular_momentum,
    integrals,
    rhs,
)
from .dynamics import DriftReport, Trajectory, integrate, project
from .rpm import (
    FiberSolutionSet,
    RpmReport,
    admissible_velocities,
    fiber_counts,
    generalized_boundary,
    icosphere,
    q_factor,
    rpm_map,
    trace_omega_curve,
)
from .sampling import sample_regions

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "DriftReport",
    "FiberJacobian",
    "FiberSolutionSet",
    "GyrostatParams",
    "IntegralConstants",
    "RegionLabel",
    "RpmReport",
    "SphereCurve",
    "State",
    "Trajectory",
    "admissible_velocities",
    "angular_momentum",
    "branch_high",
    "branch_low",
    "classify",
    "contour_condition",
    "critical_curve",
    "curve_samples",
    "distance_to_bifurcation_set",
    "fiber_counts",
    "fiber_jacobian",
    "generalized_boundary",
    "icosphere",
    "integrals",
    "integrate",
    "jk_type",
    "project",
    "q_factor",
    "rank_defect",
    "rhs",
    "rpm_map",
    "sample_regions",
    "torus_count",
    "trace_omega_curve",
    "wedge_intervals",
]
