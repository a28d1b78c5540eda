"""Online B-spline motion planning through the simulated ocean."""

from armpa.motion.spline import (
    DEFAULT_DEGREE,
    DEFAULT_SAMPLES,
    open_uniform_knots,
    build_spline,
    basis_matrix,
    sample_positions,
    chord_lengths,
    path_length,
    quadrature_length,
)
from armpa.motion.planner import (
    VehicleLimits,
    PathPhi,
    PathStates,
    LambdaComponents,
    PathSolution,
    path_kinematics,
    path_violations,
    path_cost,
    plan_path,
    replan_path,
    path_to_dict,
    path_from_dict,
    save_path_json,
    save_path_csv,
)

__all__ = [
    "DEFAULT_DEGREE", "DEFAULT_SAMPLES",
    "open_uniform_knots", "build_spline", "basis_matrix", "sample_positions",
    "chord_lengths", "path_length", "quadrature_length",
    "VehicleLimits", "PathPhi", "PathStates", "LambdaComponents",
    "PathSolution", "path_kinematics", "path_violations", "path_cost",
    "plan_path", "replan_path", "path_to_dict", "path_from_dict",
    "save_path_json", "save_path_csv",
]
