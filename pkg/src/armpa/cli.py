"""Command-line interface.

Every subcommand is driven by one RunConfig: defaults, then the optional
--config file, then flag overrides (--seed, --engine, --out, --runs).
Exit codes: 0 success, 1 planning infeasibility, 2 configuration error
(including unknown flags and unreadable config files).
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

from armpa.configs import mission_engine_config, motion_engine_config
from armpa.env.currents import make_current_field
from armpa.env.grid import save_grid_csv
from armpa.env.obstacles import ObstacleSpec, spawn_obstacles
from armpa.env.snapshot import EnvSnapshot, save_snapshot_json
from armpa.fixtures import scenario_open_water, scenario_slalom, water_grid
from armpa.graph import build_network, save_graph_json
from armpa.mission import PlanningInfeasible, plan_mission, save_plan_json
from armpa.fixtures import synchron_instance
from armpa.montecarlo import (
    monte_carlo,
    rng_for,
    save_stats_json,
    shared_context,
    stats_to_csv,
)
from armpa.motion import plan_path, save_path_csv, save_path_json
from armpa.motion.planner import VehicleLimits
from armpa.plots import emit_plots
from armpa.runconfig import (
    ConfigError,
    RunConfig,
    load_config,
    validate_config,
)
from armpa.synchron import (
    INFEASIBLE,
    MotionExecutor,
    REPORT_CSV_HEADER,
    load_report_json,
    report_csv_row,
    save_report_json,
)

ENGINE_CHOICES = ("de", "pso", "bbo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="armpa",
        description="Two-layer mission/motion planning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("gen-env", "generate an environment snapshot"),
            ("gen-graph", "generate a task network"),
            ("plan-mission", "route the mission over a task network"),
            ("plan-path", "plan one spline leg through a scenario"),
            ("run-armpa", "run the full two-layer mission"),
            ("monte-carlo", "run a Monte Carlo batch"),
            ("plot", "render figures for artifacts in the output dir")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="config file (key = value sections)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--engine", choices=ENGINE_CHOICES,
                       help="search engine override")
        p.add_argument("--out", help="output directory override")
        if name == "monte-carlo":
            p.add_argument("--runs", type=int, help="number of runs override")
    return parser


def _load_cfg(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.engine is not None:
        cfg.engine = args.engine
    if args.out is not None:
        cfg.out_dir = args.out
    if getattr(args, "runs", None) is not None:
        cfg.runs = args.runs
    validate_config(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg


def _mission_graph_for(cfg: RunConfig):
    grid = shared_context(cfg, "mission")
    rng = rng_for(cfg.seed, (0,))
    n_nodes = int(rng.integers(cfg.n_nodes_min, cfg.n_nodes_max + 1))
    graph = build_network(grid, n_nodes, rng, n_tasks=cfg.n_tasks,
                          target_degree=cfg.target_degree, speed=cfg.speed)
    return grid, graph, rng


def _scenario_for(cfg: RunConfig):
    if cfg.scenario == "slalom":
        return scenario_slalom()
    return scenario_open_water(cfg.grid_seed)


def cmd_gen_env(cfg: RunConfig) -> int:
    if cfg.mode == "motion":
        env = _scenario_for(cfg).env
    else:
        rng = rng_for(cfg.seed, (0,))
        grid = (shared_context(cfg, "mission") if cfg.mode == "mission"
                else water_grid(cfg.grid_width, cfg.grid_height,
                                cfg.cell_size))
        field = make_current_field(grid.extent, rng)
        ex, ey = grid.extent
        obstacles = spawn_obstacles(ObstacleSpec(count=4),
                                    (0.1 * ex, 0.1 * ey, 0.0),
                                    (0.9 * ex, 0.9 * ey, 100.0), rng)
        env = EnvSnapshot(grid=grid, field=field, obstacles=obstacles,
                          quantum=cfg.quantum)
    snap_path = os.path.join(cfg.out_dir, "env.json")
    grid_path = os.path.join(cfg.out_dir, "grid.csv")
    save_snapshot_json(env, snap_path)
    save_grid_csv(env.grid, grid_path)
    print(f"wrote {snap_path} and {grid_path}")
    return 0


def cmd_gen_graph(cfg: RunConfig) -> int:
    _, graph, _ = _mission_graph_for(cfg)
    path = os.path.join(cfg.out_dir, "graph.json")
    save_graph_json(graph, path)
    print(f"wrote {path}: {len(graph.waypoints)} waypoints, "
          f"{len(graph.edges)} edges, start {graph.start} "
          f"-> destination {graph.destination}")
    return 0


def cmd_plan_mission(cfg: RunConfig) -> int:
    _, graph, rng = _mission_graph_for(cfg)
    ecfg = mission_engine_config(cfg.engine, pop_size=cfg.mission_pop_size,
                                 t_max=cfg.mission_t_max)
    plan = plan_mission(graph, cfg.t_budget, cfg=ecfg, rng=rng)
    plan_path_json = os.path.join(cfg.out_dir, "mission_plan.json")
    save_plan_json(plan, plan_path_json)
    trace_path = os.path.join(cfg.out_dir, "mission_trace.csv")
    plan.result.trace.to_csv(trace_path)
    print(f"wrote {plan_path_json}: {len(plan.route)} stations, "
          f"T_R {plan.time:.1f} s, cost {plan.cost:.6f}")
    return 0


def cmd_plan_path(cfg: RunConfig) -> int:
    scenario = _scenario_for(cfg)
    rng = rng_for(cfg.seed, (0,))
    ecfg = motion_engine_config(cfg.engine, pop_size=cfg.motion_pop_size,
                                t_max=cfg.motion_t_max)
    sol = plan_path(scenario.env.grid, scenario.env.field,
                    scenario.env.obstacles, scenario.pa, scenario.pb,
                    limits=VehicleLimits(speed=cfg.speed), cfg=ecfg,
                    rng=rng, n_ctrl=cfg.n_ctrl, m_samples=cfg.m_samples)
    json_path = os.path.join(cfg.out_dir, "path.json")
    csv_path = os.path.join(cfg.out_dir, "path.csv")
    trace_path = os.path.join(cfg.out_dir, "motion_trace.csv")
    save_path_json(sol, json_path)
    save_path_csv(sol, csv_path)
    if sol.result is not None:
        sol.result.trace.to_csv(trace_path)
    clean = "clean" if sol.lambdas.is_clean() else "violating"
    print(f"wrote {json_path}: length {sol.length:.1f} m, "
          f"duration {sol.duration:.1f} s, {clean}")
    return 0


def cmd_run_armpa(cfg: RunConfig) -> int:
    from armpa.synchron import run_mission

    grid = shared_context(cfg, "armpa")
    rng = rng_for(cfg.seed, (0,))
    n_nodes = int(rng.integers(cfg.n_nodes_min, cfg.n_nodes_max + 1))
    graph, env = synchron_instance(grid, rng, n_nodes=n_nodes,
                                   n_tasks=cfg.n_tasks,
                                   target_degree=cfg.target_degree,
                                   speed=cfg.speed)
    mission_cfg = mission_engine_config(cfg.engine,
                                        pop_size=cfg.mission_pop_size,
                                        t_max=cfg.mission_t_max)
    motion_cfg = motion_engine_config(cfg.engine,
                                      pop_size=cfg.motion_pop_size,
                                      t_max=cfg.motion_t_max)
    executor = MotionExecutor(limits=VehicleLimits(speed=cfg.speed),
                              cfg=motion_cfg, rng=rng, n_ctrl=cfg.n_ctrl,
                              m_samples=cfg.m_samples)
    # The simulation itself runs on a stubbed clock so every in-report
    # number is seed-deterministic; real elapsed time goes to wall_ms only.
    t0 = time.perf_counter()
    report = run_mission(graph, cfg.t_budget, executor=executor,
                         cfg=mission_cfg, rng=rng, env=env,
                         clock=lambda: 0.0,
                         charge_planning=cfg.charge_planning)
    wall_ms = (time.perf_counter() - t0) * 1e3
    json_path = os.path.join(cfg.out_dir, "report.json")
    csv_path = os.path.join(cfg.out_dir, "report.csv")
    save_report_json(report, json_path)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(REPORT_CSV_HEADER + "\n")
        fh.write(report_csv_row(report, 0, wall_ms=wall_ms) + "\n")
    print(f"wrote {json_path}: outcome {report.outcome}, "
          f"{len(report.plans)} plans, T_R {report.t_r:.1f} s, "
          f"T_Remained {report.t_remained:.1f} s")
    return 1 if report.outcome == INFEASIBLE else 0


def cmd_monte_carlo(cfg: RunConfig) -> int:
    stats = monte_carlo(cfg)
    csv_path = os.path.join(cfg.out_dir, f"stats_{stats.mode}.csv")
    json_path = os.path.join(cfg.out_dir, f"stats_{stats.mode}.json")
    stats_to_csv(stats, csv_path)
    save_stats_json(stats, json_path)
    print(f"wrote {csv_path} ({stats.runs} rows) and {json_path}")
    return 0


def _read_records(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_plot(cfg: RunConfig) -> int:
    out = cfg.out_dir
    written: list[str] = []
    mission_csv = os.path.join(out, "stats_mission.csv")
    if os.path.exists(mission_csv):
        written += emit_plots(_read_records(mission_csv), "mission", out)
    motion_csv = os.path.join(out, "stats_motion.csv")
    if os.path.exists(motion_csv):
        written += emit_plots(_read_records(motion_csv), "motion", out)
    report_json = os.path.join(out, "report.json")
    if os.path.exists(report_json):
        written += emit_plots([load_report_json(report_json)], "armpa", out)
    if not written:
        raise ConfigError(f"no plottable artifacts found in {out}")
    print("wrote " + ", ".join(written))
    return 0


_COMMANDS = {
    "gen-env": cmd_gen_env,
    "gen-graph": cmd_gen_graph,
    "plan-mission": cmd_plan_mission,
    "plan-path": cmd_plan_path,
    "run-armpa": cmd_run_armpa,
    "monte-carlo": cmd_monte_carlo,
    "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on unknown flags/usage errors and 0 on --help.
        return int(exc.code or 0)
    try:
        cfg = _load_cfg(args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PlanningInfeasible as exc:
        print(f"planning infeasible: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
