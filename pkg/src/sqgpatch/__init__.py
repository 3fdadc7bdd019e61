"""Contour dynamics and bound certificates for patches of the generalized SQG family.

The velocity of a scalar ``omega`` is ``u = grad_perp (-Laplace)^(-1 + alpha) omega``
for ``alpha`` in ``[0, 1/2)``; ``alpha = 0`` is the two-dimensional Euler
equation.  Modules:

``geometry``
    Patch boundaries, spline panels, arc-length redistribution, areas and distances.
``biot_savart``
    Contour and area evaluators of the velocity, image terms and the odd
    reduction with its bad/good split.
``bounds``
    Numerical certificates for the velocity estimates.
``evolution``
    Runge-Kutta contour dynamics with contact detection.
``scenario``
    The odd half-plane collapse experiment with its barrier monitor.
``cli``
    Command-line front end.
"""

from __future__ import annotations

from .biot_savart import (
    KernelParams,
    VelocityDecomposition,
    kernel_terms,
    odd_decomposition,
    velocity_boundary_integral,
    velocity_odd_system,
    velocity_region_area,
)
from .bounds import (
    BoundCertificate,
    check_bad_bound,
    check_drift_constant,
    check_good_bound,
    check_prop_drift,
    check_sign_lemma,
    check_uniform_u,
    search_delta_alpha,
)
from .errors import AccuracyError, DomainError, GeometryError, SingularEvaluationError, StepRejected, UsageError
from .evolution import GridSpec, PatchSystem, SingularityEvent, StepDiagnostics, Trajectory, run, step, velocity_field_snapshot
from .geometry import PatchCurve, Region, build_triangle_A, hausdorff_distance, polygon_area, region_distance, reparametrize_constant_speed
from .scenario import BarrierState, CollapseReport, ScenarioConfig, barrier_at, build_initial_data, monitor_containment, run_collapse_experiment

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BarrierState",
    "BoundCertificate",
    "CollapseReport",
    "DomainError",
    "GeometryError",
    "GridSpec",
    "KernelParams",
    "PatchCurve",
    "PatchSystem",
    "Region",
    "ScenarioConfig",
    "SingularEvaluationError",
    "SingularityEvent",
    "StepDiagnostics",
    "StepRejected",
    "Trajectory",
    "UsageError",
    "VelocityDecomposition",
    "barrier_at",
    "build_initial_data",
    "build_triangle_A",
    "check_bad_bound",
    "check_drift_constant",
    "check_good_bound",
    "check_prop_drift",
    "check_sign_lemma",
    "check_uniform_u",
    "hausdorff_distance",
    "kernel_terms",
    "monitor_containment",
    "odd_decomposition",
    "polygon_area",
    "region_distance",
    "reparametrize_constant_speed",
    "run",
    "run_collapse_experiment",
    "search_delta_alpha",
    "step",
    "velocity_boundary_integral",
    "velocity_field_snapshot",
    "velocity_odd_system",
    "velocity_region_area",
]
