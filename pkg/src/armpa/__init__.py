"""Two-layer mission and motion planning toolkit for autonomous underwater
vehicles: a time-budgeted task-routing layer over a waypoint network, an
online spline motion layer in a simulated dynamic ocean, three population
search engines and a synchronization executive tying the layers together.
"""

from armpa.graph import (
    Edge,
    Task,
    TaskGraph,
    Waypoint,
    build_network,
    decode_route,
    generate_tasks,
    graph_from_dict,
    graph_to_dict,
    load_graph_json,
    prune_graph,
    save_graph_json,
    validate_route,
)
from armpa.mission import (
    MissionPlan,
    PhiWeights,
    PlanningInfeasible,
    RouteCost,
    best_route_exhaustive,
    enumerate_routes,
    plan_mission,
    replan_mission,
    route_cost,
    route_slack,
    route_time,
)
from armpa.motion import (
    PathPhi,
    PathSolution,
    VehicleLimits,
    path_cost,
    path_kinematics,
    path_violations,
    plan_path,
    replan_path,
)
from armpa.optim import (
    BBOConfig,
    DEConfig,
    ENGINE_NAMES,
    PSOConfig,
    config_for,
    optimize,
)
from armpa.configs import mission_engine_config, motion_engine_config
from armpa.runconfig import (
    ConfigError,
    RunConfig,
    emit_config,
    load_config,
    parse_config_text,
    save_config,
)
from armpa.synchron import (
    GraphTimeExecutor,
    LegOutcome,
    LegPlan,
    MissionReport,
    MotionExecutor,
    ScriptedExecutor,
    check_replan,
    load_report_json,
    remaining_time,
    run_mission,
    save_report_json,
    total_cost,
)
from armpa.montecarlo import (
    BatchStats,
    linear_fit_r2,
    monte_carlo,
    scaling_study,
    stats_to_csv,
)
from armpa.plots import emit_plots

__version__ = "0.1.0"

__all__ = [
    "Edge", "Task", "TaskGraph", "Waypoint", "build_network", "decode_route",
    "generate_tasks", "graph_from_dict", "graph_to_dict", "load_graph_json",
    "prune_graph", "save_graph_json", "validate_route",
    "MissionPlan", "PhiWeights", "PlanningInfeasible", "RouteCost",
    "best_route_exhaustive", "enumerate_routes", "plan_mission",
    "replan_mission", "route_cost", "route_slack", "route_time",
    "PathPhi", "PathSolution", "VehicleLimits", "path_cost",
    "path_kinematics", "path_violations", "plan_path", "replan_path",
    "BBOConfig", "DEConfig", "ENGINE_NAMES", "PSOConfig", "config_for",
    "optimize",
    "mission_engine_config", "motion_engine_config",
    "ConfigError", "RunConfig", "emit_config", "load_config",
    "parse_config_text", "save_config",
    "GraphTimeExecutor", "LegOutcome", "LegPlan", "MissionReport",
    "MotionExecutor", "ScriptedExecutor", "check_replan",
    "load_report_json", "remaining_time", "run_mission", "save_report_json",
    "total_cost",
    "BatchStats", "linear_fit_r2", "monte_carlo", "scaling_study",
    "stats_to_csv",
    "emit_plots",
    "__version__",
]
