"""Monte Carlo batch harness.

Runs a batch of independent missions, motion plans or full-stack runs and
aggregates statistics. Every run draws its generator from the master seed
and its run index, so a batch is fully reproducible and each run can be
executed in any order or process: results are assembled by run index. All
simulated quantities are deterministic per seed; wall-clock measurements
are confined to the designated columns (`cpu_s`, `wall_ms`) so everything
else is byte-identical across repeats.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from armpa.configs import mission_engine_config, motion_engine_config
from armpa.fixtures import (
    MotionScenario,
    mission_grid,
    scenario_open_water,
    scenario_slalom,
    synchron_instance,
    water_grid,
)
from armpa.graph import build_network, validate_route
from armpa.mission import plan_mission
from armpa.motion import plan_path
from armpa.runconfig import MODES, ConfigError, RunConfig
from armpa.synchron import MotionExecutor, run_mission
from armpa.motion.planner import VehicleLimits

Record = dict[str, object]

# Wall-clock measurements are confined to these columns/fields; everything
# else in a batch artifact is reproducible byte-for-byte from the seed.
WALL_COLUMNS = ("cpu_s", "wall_ms")

QUANTILE_KEYS = ("min", "q25", "median", "q75", "max")

MISSION_COLUMNS = ("run", "engine", "n_nodes", "stations", "tasks", "t_r",
                   "slack", "weight", "c_r", "cpu_s")
MOTION_COLUMNS = ("run", "engine", "scenario", "length", "duration", "cost",
                  "lambda_total", "clean", "iterations", "cpu_s")
ARMPA_COLUMNS = ("run", "engine", "outcome", "plans", "rep", "stations",
                 "legs", "t_r", "t_remained", "t_nabla_final", "c_nabla",
                 "sum_leg_time", "sum_charges", "wall_ms")

_COLUMNS = {"mission": MISSION_COLUMNS, "motion": MOTION_COLUMNS,
            "armpa": ARMPA_COLUMNS}
_QUANTILE_METRICS = {
    "mission": ("cpu_s", "t_r", "tasks", "weight", "c_r", "slack"),
    "motion": ("cpu_s", "cost", "duration", "length", "lambda_total"),
    "armpa": ("wall_ms", "t_r", "t_remained", "c_nabla", "plans"),
}


@dataclass
class BatchStats:
    """Aggregate of one Monte Carlo batch; one record per run."""

    mode: str
    engine: str
    records: list[Record]
    quantiles: dict[str, dict[str, float]]
    violation_counts: dict[str, int]
    payloads: list = field(default_factory=list, repr=False)

    @property
    def runs(self) -> int:
        return len(self.records)


def rng_for(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                        spawn_key=key))


# Per-process context cache: the shared map or scenario is built once per
# worker process and reused by every run it executes.
_CTX_CACHE: dict[tuple, object] = {}


def shared_context(cfg: RunConfig, mode: str):
    if mode == "mission":
        key = ("mission", cfg.grid_seed, cfg.grid_width, cfg.grid_height,
               cfg.cell_size)
        if key not in _CTX_CACHE:
            _CTX_CACHE[key] = mission_grid(cfg.grid_seed, cfg.grid_width,
                                           cfg.grid_height, cfg.cell_size)
    elif mode == "motion":
        key = ("motion", cfg.scenario, cfg.grid_seed)
        if key not in _CTX_CACHE:
            if cfg.scenario == "slalom":
                _CTX_CACHE[key] = scenario_slalom()
            else:
                _CTX_CACHE[key] = scenario_open_water(cfg.grid_seed)
    else:
        key = ("armpa", cfg.grid_width, cfg.grid_height, cfg.cell_size)
        if key not in _CTX_CACHE:
            _CTX_CACHE[key] = water_grid(cfg.grid_width, cfg.grid_height,
                                         cfg.cell_size)
    return _CTX_CACHE[key]


def _mission_run(cfg: RunConfig, run_idx: int, grid, clock) -> tuple[Record, object]:
    rng = rng_for(cfg.seed, (run_idx,))
    n_nodes = int(rng.integers(cfg.n_nodes_min, cfg.n_nodes_max + 1))
    graph = build_network(grid, n_nodes, rng, n_tasks=cfg.n_tasks,
                          target_degree=cfg.target_degree, speed=cfg.speed)
    ecfg = mission_engine_config(cfg.engine, pop_size=cfg.mission_pop_size,
                                 t_max=cfg.mission_t_max)
    t0 = clock()
    plan = plan_mission(graph, cfg.t_budget, cfg=ecfg, rng=rng)
    cpu = clock() - t0
    tasks = sum(1 for a, b in zip(plan.route, plan.route[1:])
                if graph.edge(a, b).task is not None)
    record: Record = {
        "run": run_idx, "engine": cfg.engine, "n_nodes": n_nodes,
        "stations": len(plan.route), "tasks": tasks, "t_r": plan.time,
        "slack": plan.slack, "weight": plan.weight_sum, "c_r": plan.cost,
        "cpu_s": cpu,
    }
    broken = validate_route(graph, plan.route, cfg.t_budget)
    return record, (plan, broken)


def _motion_run(cfg: RunConfig, run_idx: int, scenario: MotionScenario,
                clock) -> tuple[Record, object]:
    rng = rng_for(cfg.seed, (run_idx,))
    ecfg = motion_engine_config(cfg.engine, pop_size=cfg.motion_pop_size,
                                t_max=cfg.motion_t_max)
    env = scenario.env
    t0 = clock()
    sol = plan_path(env.grid, env.field, env.obstacles, scenario.pa,
                    scenario.pb, limits=VehicleLimits(speed=cfg.speed),
                    cfg=ecfg, rng=rng, n_ctrl=cfg.n_ctrl,
                    m_samples=cfg.m_samples)
    cpu = clock() - t0
    record: Record = {
        "run": run_idx, "engine": cfg.engine, "scenario": cfg.scenario,
        "length": sol.length, "duration": sol.duration, "cost": sol.cost,
        "lambda_total": sol.lambdas.total_raw,
        "clean": int(sol.lambdas.is_clean()),
        "iterations": sol.result.iterations if sol.result is not None else 0,
        "cpu_s": cpu,
    }
    return record, sol


def _armpa_run(cfg: RunConfig, run_idx: int, grid) -> tuple[Record, object]:
    rng = rng_for(cfg.seed, (run_idx,))
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
    record: Record = {
        "run": run_idx, "engine": cfg.engine, "outcome": report.outcome,
        "plans": len(report.plans), "rep": report.rep,
        "stations": len(report.resultant_route), "legs": len(report.legs),
        "t_r": report.t_r, "t_remained": report.t_remained,
        "t_nabla_final": report.t_nabla_final, "c_nabla": report.c_nabla,
        "sum_leg_time": math.fsum(leg.duration for leg in report.legs),
        "sum_charges": math.fsum(report.charges),
        "wall_ms": wall_ms,
    }
    return record, report


def _one_run(cfg: RunConfig, mode: str, run_idx: int, clock
             ) -> tuple[int, Record, object]:
    ctx = shared_context(cfg, mode)
    if mode == "mission":
        record, payload = _mission_run(cfg, run_idx, ctx, clock)
    elif mode == "motion":
        record, payload = _motion_run(cfg, run_idx, ctx, clock)
    else:
        record, payload = _armpa_run(cfg, run_idx, ctx)
    return run_idx, record, payload


def _pool_job(cfg: RunConfig, mode: str, run_idx: int):
    return _one_run(cfg, mode, run_idx, time.perf_counter)


def _quantiles(records: list[Record], metrics: tuple[str, ...]
               ) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for metric in metrics:
        vals = np.array([float(r[metric]) for r in records], dtype=float)
        qs = np.quantile(vals, [0.0, 0.25, 0.5, 0.75, 1.0])
        out[metric] = dict(zip(QUANTILE_KEYS, (float(q) for q in qs)))
    return out


def _violations(mode: str, records: list[Record], payloads: list
                ) -> dict[str, int]:
    counts: dict[str, int] = {}
    if mode == "mission":
        for name in ("endpoints", "missing-edge", "repeated-node",
                     "repeated-edge", "time-budget"):
            counts[name] = 0
        for _, broken in payloads:
            for name in broken:
                counts[name] += 1
    elif mode == "motion":
        for name in ("z_min", "z_max", "u", "v", "psi", "collision"):
            counts[name] = sum(1 for sol in payloads
                               if getattr(sol.lambdas, name) > 0.0)
    else:
        for rec in records:
            key = str(rec["outcome"])
            counts[key] = counts.get(key, 0) + 1
    return counts


def monte_carlo(cfg: RunConfig, runs: int | None = None,
                mode: str | None = None, clock=None) -> BatchStats:
    """Execute a batch and aggregate it.

    Runs are independent: each gets a generator spawned from the master
    seed and its run index. With cfg.workers > 1 the runs execute in a
    process pool; records are ordered by run index either way. A custom
    `clock` (for tests) requires the sequential path.
    """
    runs = cfg.runs if runs is None else runs
    mode = cfg.mode if mode is None else mode
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if clock is not None and cfg.workers > 1:
        raise ConfigError("custom clock requires workers = 1")

    results: list[tuple[int, Record, object]] = []
    if cfg.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=cfg.workers) as pool:
            futures = [pool.submit(_pool_job, cfg, mode, idx)
                       for idx in range(runs)]
            results = [f.result() for f in futures]
    else:
        tick = clock if clock is not None else time.perf_counter
        for idx in range(runs):
            results.append(_one_run(cfg, mode, idx, tick))
    results.sort(key=lambda item: item[0])

    records = [rec for _, rec, _ in results]
    payloads = [payload for _, _, payload in results]
    assert len(records) == runs
    return BatchStats(mode=mode, engine=cfg.engine, records=records,
                      quantiles=_quantiles(records, _QUANTILE_METRICS[mode]),
                      violation_counts=_violations(mode, records, payloads),
                      payloads=payloads)


# -- mission-planner scaling study ----------------------------------------------

SCALING_NODE_COUNTS = (30, 60, 90, 120, 150)
SCALING_COLUMNS = ("n_nodes", "rep", "stations", "t_r", "cpu_s")


def scaling_study(cfg: RunConfig,
                  node_counts: tuple[int, ...] = SCALING_NODE_COUNTS,
                  runs_per_count: int = 3, clock=None) -> list[Record]:
    """Time the mission planner across graph sizes on the shared map."""
    grid = shared_context(cfg, "mission")
    tick = clock if clock is not None else time.perf_counter
    ecfg_kwargs = dict(pop_size=cfg.mission_pop_size, t_max=cfg.mission_t_max)
    records: list[Record] = []
    for n_nodes in node_counts:
        for rep in range(runs_per_count):
            rng = rng_for(cfg.seed, (n_nodes, rep))
            graph = build_network(grid, n_nodes, rng, n_tasks=cfg.n_tasks,
                                  target_degree=cfg.target_degree,
                                  speed=cfg.speed)
            ecfg = mission_engine_config(cfg.engine, **ecfg_kwargs)
            t0 = tick()
            plan = plan_mission(graph, cfg.t_budget, cfg=ecfg, rng=rng)
            cpu = tick() - t0
            records.append({"n_nodes": n_nodes, "rep": rep,
                            "stations": len(plan.route), "t_r": plan.time,
                            "cpu_s": cpu})
    return records


def linear_fit_r2(x, y) -> tuple[float, float, float]:
    """Least-squares line y ~ a*x + b; returns (a, b, R^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a, b = np.polyfit(x, y, 1)
    resid = y - (a * x + b)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return float(a), float(b), 1.0
    return float(a), float(b), 1.0 - float(np.sum(resid ** 2)) / ss_tot


# -- artifact emission -----------------------------------------------------------


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records: list[Record], columns: tuple[str, ...],
                   path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in records:
            writer.writerow([_format_cell(rec[c]) for c in columns])


def stats_to_csv(stats: BatchStats, path) -> None:
    records_to_csv(stats.records, _COLUMNS[stats.mode], path)


def save_stats_json(stats: BatchStats, path) -> None:
    doc = {"mode": stats.mode, "engine": stats.engine, "runs": stats.runs,
           "quantiles": stats.quantiles,
           "violation_counts": stats.violation_counts}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
