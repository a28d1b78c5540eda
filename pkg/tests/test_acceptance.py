"""End-to-end guarantees for the planning toolkit.

One test per observable guarantee: routing quality against an exhaustive
oracle, mission feasibility rates, planner runtime scaling, motion
feasibility in the obstacle slalom, accuracy of the spline length model,
monotone re-planning, executive time bookkeeping, reproducibility of all
command-line artifacts, and exact degenerate-parameter identities for the
three search engines.

Each test prints one pass/fail line under `pytest -v`. Budgets are wall
time on a single CPU.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np

from armpa.cli import main as cli_main
from armpa.configs import mission_engine_config, motion_engine_config
from armpa.fixtures import (
    REPLAY_BUDGET,
    SCENARIO2_T_EPS,
    SMALL_BUDGET,
    replay_executor,
    replay_graph,
    scenario_slalom,
    small_instances,
)
from armpa.mission import best_route_exhaustive, plan_mission
from armpa.montecarlo import linear_fit_r2, monte_carlo, rng_for, scaling_study
from armpa.motion import (
    path_length,
    plan_path,
    quadrature_length,
    replan_path,
    sample_positions,
)
from armpa.motion.planner import VehicleLimits, _psi_rate
from armpa.optim import (
    BBOConfig,
    DEConfig,
    PSOConfig,
    Problem,
    Swarm,
    bbo_rates,
    pso_step,
)
from armpa.optim.de import de_trials, distinct_triples
from armpa.runconfig import RunConfig, emit_config
from armpa.synchron import run_mission

ENGINES = ("de", "pso", "bbo")


# -- 1. routing quality against the exhaustive oracle ---------------------------


def test_engines_match_exhaustive_optimum_on_small_instances():
    """Every engine finds the enumerated optimum in >= 90% of seeded runs
    on each of 20 fixed six-node instances, within two minutes total."""
    t0 = time.perf_counter()
    instances = small_instances()
    assert len(instances) == 20
    optima = [best_route_exhaustive(g, SMALL_BUDGET)[1].cost
              for g in instances]
    for engine in ENGINES:
        cfg = mission_engine_config(engine)
        assert cfg.pop_size == 70 and cfg.t_max == 100
        for gi, (g, opt) in enumerate(zip(instances, optima)):
            hits = 0
            for run in range(100):
                plan = plan_mission(g, SMALL_BUDGET, cfg=cfg,
                                    rng=rng_for(run, (gi,)))
                # The oracle is a global minimum, so nothing may beat it.
                assert plan.cost >= opt - 1e-9 * max(opt, 1.0)
                if math.isclose(plan.cost, opt, rel_tol=1e-9, abs_tol=1e-12):
                    hits += 1
            assert hits >= 90, (engine, gi, hits)
    assert time.perf_counter() - t0 < 120.0


# -- 2. mission feasibility rate -------------------------------------------------


def test_mission_batches_stay_within_budget():
    """150 random missions per engine on the shared coastal map: every
    engine returns a violation-free route in >= 99% of runs, and the
    whole batch finishes inside ten minutes."""
    t0 = time.perf_counter()
    for engine in ENGINES:
        cfg = RunConfig(mode="mission", runs=150, engine=engine)
        stats = monte_carlo(cfg)
        assert len(stats.records) == 150
        broken_runs = sum(1 for _, broken in stats.payloads if broken)
        assert broken_runs <= 1, (engine, broken_runs)
        if broken_runs == 0:
            assert sum(stats.violation_counts.values()) == 0
    assert time.perf_counter() - t0 < 600.0


# -- 3. planner runtime scaling ---------------------------------------------------


def test_mission_planner_cpu_scales_linearly_with_nodes():
    """Mean planning CPU grows linearly (R^2 >= 0.9) over 30..150 nodes
    and no single run exceeds ten seconds."""
    cfg = RunConfig(mode="mission")
    counts = (30, 60, 90, 120, 150)
    records = scaling_study(cfg, node_counts=counts, runs_per_count=10)
    assert len(records) == len(counts) * 10
    assert max(r["cpu_s"] for r in records) < 10.0
    means = [float(np.mean([r["cpu_s"] for r in records
                            if r["n_nodes"] == n])) for n in counts]
    slope, _, r2 = linear_fit_r2(counts, means)
    assert slope > 0.0
    assert r2 >= 0.9, (r2, means)


# -- 4. motion feasibility in the obstacle slalom --------------------------------


def test_slalom_paths_clean_for_every_engine():
    """In the deterministic slalom each engine produces a violation-free
    path within 100 iterations in >= 95 of 100 seeds; clean paths respect
    depth, surge, sway, yaw-rate and leg-time envelopes."""
    scenario = scenario_slalom()
    env = scenario.env
    limits = VehicleLimits()
    for ei, engine in enumerate(ENGINES):
        cfg = motion_engine_config(engine)
        assert cfg.t_max == 100
        clean = 0
        for run in range(100):
            sol = plan_path(env.grid, env.field, env.obstacles,
                            scenario.pa, scenario.pb, limits=limits,
                            cfg=cfg, rng=rng_for(run, (ei,)))
            assert sol.result is not None and sol.result.iterations <= 100
            if not sol.lambdas.is_clean():
                continue
            clean += 1
            st = sol.states
            z = st.positions[:, 2]
            assert np.all(z >= limits.z_min) and np.all(z <= limits.z_max)
            assert np.all(st.u <= limits.u_max + 1e-12)
            assert np.all(np.abs(st.v) <= limits.sway_max + 1e-12)
            rate = np.degrees(np.abs(_psi_rate(st.psi, st.seg_len,
                                               limits.speed)))
            assert np.all(rate <= limits.psi_rate_max_deg + 1e-9)
            assert sol.duration <= SCENARIO2_T_EPS
        assert clean >= 95, (engine, clean)


# -- 5. spline length model -------------------------------------------------------


def test_chord_length_tracks_quadrature():
    """Chord-sum path length stays within 0.1% of adaptive quadrature on
    1000 random control sets; collinear control points reproduce the
    straight-line distance to 1e-9 relative."""
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(4, 9))
        ctrl = rng.uniform(0.0, 1000.0, size=(n, 3))
        chord = path_length(sample_positions(ctrl))
        exact = quadrature_length(ctrl)
        worst = max(worst, abs(chord - exact) / exact)
    assert worst < 1e-3, worst

    for _ in range(50):
        n = int(rng.integers(4, 9))
        a = rng.uniform(0.0, 1000.0, size=3)
        d = rng.uniform(-1.0, 1.0, size=3)
        ts = np.sort(rng.uniform(0.0, 500.0, size=n))
        ctrl = a[None, :] + ts[:, None] * d[None, :]
        straight = float(np.linalg.norm(ctrl[-1] - ctrl[0]))
        assert abs(path_length(sample_positions(ctrl)) - straight) <= 1e-9 * straight
        assert abs(quadrature_length(ctrl) - straight) <= 1e-9 * straight


# -- 6. re-planning never regresses ----------------------------------------------


def test_replan_in_unchanged_environment_never_worse():
    """Re-planning a leg from its own start in an unchanged environment
    returns a path no costlier than the previous one, over 10^4 random
    legs."""
    scenario = scenario_slalom()
    env = scenario.env
    rng = np.random.default_rng(7)
    cfg = DEConfig(pop_size=8, t_max=4)
    xmax, ymax = env.grid.extent
    for _ in range(10_000):
        while True:
            pa = rng.uniform((50.0, 50.0, 5.0), (xmax - 50.0, ymax - 50.0, 95.0))
            pb = rng.uniform((50.0, 50.0, 5.0), (xmax - 50.0, ymax - 50.0, 95.0))
            if env.grid.is_water(pa[0], pa[1]) and env.grid.is_water(pb[0], pb[1]):
                break
        prev = plan_path(env.grid, env.field, env.obstacles, pa, pb,
                         cfg=cfg, rng=rng, m_samples=40)
        sol = replan_path(prev, env.grid, env.field, env.obstacles, pa, pb,
                          cfg=cfg, rng=rng, m_samples=40)
        assert sol.cost <= prev.cost


# -- 7. executive time bookkeeping -------------------------------------------------


def test_executive_conserves_the_time_budget():
    """30 full two-layer missions: the remaining budget always equals the
    budget minus the fsum of leg durations and planning charges, route
    time never exceeds the budget on success, and the scripted replay
    reproduces its table: 3 plans, a 9-station resultant and 213 s left."""
    t_v = 14400.0
    for engine in ENGINES:
        cfg = RunConfig(mode="armpa", runs=30, engine=engine,
                        grid_width=200, grid_height=200,
                        n_nodes_min=20, n_nodes_max=20, n_tasks=10,
                        target_degree=4.0, t_budget=t_v,
                        mission_pop_size=24, mission_t_max=30,
                        motion_pop_size=24, motion_t_max=20, m_samples=60)
        stats = monte_carlo(cfg)
        assert len(stats.records) == 30
        for r in stats.records:
            ledger = math.fsum([r["sum_leg_time"], r["sum_charges"]])
            assert r["t_nabla_final"] == t_v - ledger
            if r["outcome"] == "success":
                assert r["t_r"] <= t_v
                assert r["t_remained"] >= 0.0

    report = run_mission(replay_graph(), REPLAY_BUDGET,
                         executor=replay_executor(),
                         cfg=mission_engine_config("de"),
                         rng=rng_for(1, (0,)), clock=lambda: 0.0)
    assert report.outcome == "success"
    assert len(report.plans) == 3
    assert [p.reason for p in report.plans] == ["", "actual-time",
                                                "planned-time"]
    assert len(report.resultant_route) == 9
    assert report.t_remained == 213.0


# -- 8. reproducibility of command-line artifacts ---------------------------------

_WALL_COLUMNS = {"cpu_s", "wall_ms", "elapsed_ms"}


def _masked_csv(path: Path) -> list[str]:
    """CSV lines with wall-clock cells blanked, header comments kept."""
    lines = path.read_text().splitlines()
    head = next(i for i, ln in enumerate(lines) if not ln.startswith("#"))
    cols = lines[head].split(",")
    wall = [i for i, c in enumerate(cols) if c in _WALL_COLUMNS]
    out = lines[: head + 1]
    for ln in lines[head + 1:]:
        cells = ln.split(",")
        for i in wall:
            cells[i] = "_"
        out.append(",".join(cells))
    return out


def _masked_json(path: Path):
    def strip(node):
        if isinstance(node, dict):
            return {k: strip(v) for k, v in node.items()
                    if k not in _WALL_COLUMNS}
        if isinstance(node, list):
            return [strip(v) for v in node]
        return node

    return strip(json.loads(path.read_text()))


def _artifacts_match(a: Path, b: Path) -> None:
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        pa, pb = a / name, b / name
        if name.endswith(".json"):
            assert _masked_json(pa) == _masked_json(pb), name
        elif name.endswith(".csv"):
            assert _masked_csv(pa) == _masked_csv(pb), name
        else:
            assert pa.read_bytes() == pb.read_bytes(), name


def test_cli_artifacts_reproducible_for_same_seed(tmp_path):
    """Running every subcommand twice with one seed yields byte-identical
    artifacts outside the wall-clock columns."""
    cfg = RunConfig(mode="mission", runs=6, grid_width=150, grid_height=150,
                    n_nodes_min=8, n_nodes_max=12, n_tasks=6,
                    target_degree=4.0, t_budget=3600.0,
                    mission_pop_size=40, mission_t_max=60,
                    motion_pop_size=24, motion_t_max=20, m_samples=60)
    cfg_path = tmp_path / "small.cfg"
    cfg_path.write_text(emit_config(cfg))
    armpa_cfg = RunConfig(mode="armpa", runs=2, grid_width=200,
                          grid_height=200, n_nodes_min=20, n_nodes_max=20,
                          n_tasks=10, target_degree=4.0, t_budget=14400.0,
                          mission_pop_size=24, mission_t_max=30,
                          motion_pop_size=24, motion_t_max=20, m_samples=60)
    armpa_path = tmp_path / "armpa.cfg"
    armpa_path.write_text(emit_config(armpa_cfg))

    jobs = (
        ("gen-env", cfg_path),
        ("gen-graph", cfg_path),
        ("plan-mission", cfg_path),
        ("plan-path", cfg_path),
        ("run-armpa", armpa_path),
        ("monte-carlo", cfg_path),
    )
    for cmd, conf in jobs:
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{cmd}-{tag}"
            rc = cli_main([cmd, "--config", str(conf), "--seed", "5",
                           "--out", str(out)])
            assert rc == 0, cmd
            outs.append(out)
        _artifacts_match(outs[0], outs[1])


# -- 9. exact engine update identities ---------------------------------------------


class _ThirdParentBlend:
    """Generator facade: the three-way blend draw comes back one-hot on the
    third parent; every other draw passes through."""

    def __init__(self, seed: int):
        self._rng = np.random.default_rng(seed)

    def integers(self, *args, **kwargs):
        return self._rng.integers(*args, **kwargs)

    def random(self, *args, **kwargs):
        return self._rng.random(*args, **kwargs)

    def uniform(self, low=0.0, high=1.0, size=None):
        if isinstance(size, tuple) and len(size) == 2 and size[1] == 3:
            out = np.zeros(size)
            out[:, 2] = 1.0
            return out
        return self._rng.uniform(low, high, size=size)


def _box(dim: int, span: float) -> Problem:
    return Problem(dimension=dim, lower=np.full(dim, -span),
                   upper=np.full(dim, span),
                   cost=lambda x: float(np.sum(np.asarray(x) ** 2)))


def test_engine_update_rules_collapse_to_exact_identities():
    """Degenerate parameters collapse each update rule to a closed form,
    bit for bit: a zero-amplitude blend mutation copies its third parent,
    a frozen swarm neither moves nor updates personal bests, a unit-inertia
    swarm drifts by exactly its velocity, and migration rates meet their
    endpoint and shared-rate sum identities."""
    problem = _box(4, 3.0)

    # Mutation with F = 0 and blend weights (0, 0, 1) is the third parent.
    X = np.random.default_rng(9).uniform(-3.0, 3.0, size=(12, 4))
    cfg = DEConfig(pop_size=12, f_low=0.0, f_high=0.0, cross_rate=1.0)
    trial = de_trials(X, cfg, problem, _ThirdParentBlend(5))
    _, _, r3 = distinct_triples(12, np.random.default_rng(5))
    assert np.array_equal(trial, X[r3])

    # Zero inertia and zero attraction freeze the swarm in place.
    rng = np.random.default_rng(11)
    X = rng.uniform(-3.0, 3.0, size=(10, 4))
    V = rng.uniform(-1.0, 1.0, size=(10, 4))
    costs = problem.evaluate_batch(X)
    swarm = Swarm(X=X.copy(), V=V.copy(), costs=costs.copy(),
                  pbest_x=X.copy(), pbest_cost=costs.copy())
    frozen = PSOConfig(pop_size=10, t_max=10, c1=0.0, c2=0.0,
                       omega_start=0.0, omega_end=0.0)
    for it in (0, 3, 9):
        nxt, _ = pso_step(swarm, frozen, problem, rng, iteration=it)
        assert np.all(nxt.V == 0.0)
        assert np.array_equal(nxt.X, X)
        assert np.array_equal(nxt.pbest_x, X)
        assert np.array_equal(nxt.pbest_cost, costs)

    # Unit inertia with no attraction drifts by exactly V while in bounds.
    X = rng.uniform(-1.0, 1.0, size=(10, 4))
    V = rng.uniform(-0.01, 0.01, size=(10, 4))
    swarm = Swarm(X=X.copy(), V=V.copy(), costs=problem.evaluate_batch(X),
                  pbest_x=X.copy(), pbest_cost=problem.evaluate_batch(X))
    drift = PSOConfig(pop_size=10, t_max=10, c1=0.0, c2=0.0,
                      omega_start=1.0, omega_end=1.0)
    nxt, _ = pso_step(swarm, drift, problem, rng, iteration=4)
    assert np.array_equal(nxt.X, X + V)
    assert np.array_equal(nxt.V, V)

    # Migration rates: the best habitat immigrates at exactly zero and
    # emigrates at exactly the emigration ceiling; rates are monotone; and
    # with equal power-of-two rates the per-rank sum is exactly that rate.
    for er, ir in ((0.2, 0.8), (1.0, 1.0), (0.37, 0.61)):
        lam, mu = bbo_rates(24, BBOConfig(e_rate=er, i_rate=ir))
        assert lam[0] == 0.0
        assert mu[0] == er
        assert np.all(np.diff(lam) > 0.0) and np.all(np.diff(mu) < 0.0)
    for rate in (1.0, 0.5, 0.25):
        for pop in (5, 24, 70, 113, 128):
            lam, mu = bbo_rates(pop, BBOConfig(e_rate=rate, i_rate=rate))
            assert np.all(lam + mu == rate)
