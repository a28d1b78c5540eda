"""Two-layer mission executive.

The executive owns all mutable state and drives the two planning layers
round-robin in a single thread: the mission layer publishes a waypoint
sequence (a route over the task graph), the motion layer publishes per-leg
time and cost results, and the driver compares the motion layer's leg
times against the active plan's per-edge estimates, ordering a mission
re-plan whenever a leg loses time.

Trigger rule: a leg's estimate T_e is its edge's traverse time from the
task graph. A strictly larger realized leg time triggers re-planning on
arrival at the next waypoint; a strictly larger predicted time for the
upcoming leg triggers re-planning before departure, once at least one edge
of the active plan has been traversed (a fresh plan always gets to run its
first leg, which guarantees progress between re-plans).

Budget ledger: every leg duration and every planning charge lands in one
ledger; the remaining budget is always the initial budget minus the
error-free sum (math.fsum) of the ledger. fsum is permutation invariant,
so the conservation identity

    T_total = T_remaining + fsum(leg durations + planning charges)

holds exactly in floating point no matter how the report's lists are
re-summed.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from armpa.graph import TaskGraph
from armpa.mission import (
    MissionPlan, PhiWeights, PlanningInfeasible, plan_mission, replan_mission,
    route_cost,
)
from armpa.optim import EngineConfig
from armpa.motion import (
    DEFAULT_SAMPLES, PathPhi, PathSolution, VehicleLimits, plan_path,
)
from armpa.env.snapshot import EnvSnapshot, evolve_env

CONTINUE = "continue"
REPLAN = "replan_mission"

SUCCESS = "success"
TIMEOUT = "timeout"
INFEASIBLE = "infeasible"


def check_replan(t_path: float, t_edge: float) -> str:
    """Strict excess of a leg time over its edge estimate orders a re-plan;
    the boundary (equal times) continues."""
    return REPLAN if t_path > t_edge else CONTINUE


def remaining_time(t_v: float, t_r: float) -> float:
    """Unused budget at mission end."""
    return t_v - t_r


# -- motion layer protocol -----------------------------------------------------


@dataclass
class LegPlan:
    """Motion layer's prediction for one leg.

    eta is the leg time in the same currency as the edge estimate it is
    compared against; duration is the budget the leg will consume.
    """

    i: int
    j: int
    eta: float
    duration: float
    path_cost: float
    straight_dist: float
    lambda_total: float = 0.0
    solution: PathSolution | None = None


@dataclass
class LegOutcome:
    """Realized result of traversing one leg."""

    eta: float
    duration: float


class LegExecutor(Protocol):
    """The motion layer as seen by the executive."""

    def prepare(self, graph: TaskGraph, i: int, j: int,
                env: EnvSnapshot | None, sim_time: float) -> LegPlan: ...

    def traverse(self, graph: TaskGraph, plan: LegPlan,
                 env: EnvSnapshot | None, sim_time: float) -> LegOutcome: ...


class GraphTimeExecutor:
    """Motion layer stub whose legs take exactly the graph's edge times.

    With it, no trigger ever fires and a single mission plan runs end to
    end; the per-leg path cost equals the straight-line distance.
    """

    def prepare(self, graph, i, j, env, sim_time):
        e = graph.edge(i, j)
        return LegPlan(i=i, j=j, eta=e.time, duration=e.time,
                       path_cost=e.distance, straight_dist=e.distance)

    def traverse(self, graph, plan, env, sim_time):
        return LegOutcome(eta=plan.eta, duration=plan.duration)


@dataclass
class ScriptedExecutor:
    """Graph-time legs with scripted per-leg offsets, for deterministic
    replay of recorded missions.

    Offsets are keyed by the directed pair (i, j) in travel order:
    planned_extra shifts the predicted time reported before departure,
    actual_extra shifts the realized time (and the consumed duration).
    """

    planned_extra: dict[tuple[int, int], float] = field(default_factory=dict)
    actual_extra: dict[tuple[int, int], float] = field(default_factory=dict)

    def prepare(self, graph, i, j, env, sim_time):
        e = graph.edge(i, j)
        eta = e.time + self.planned_extra.get((i, j), 0.0)
        return LegPlan(i=i, j=j, eta=eta, duration=eta,
                       path_cost=e.distance, straight_dist=e.distance)

    def traverse(self, graph, plan, env, sim_time):
        e = graph.edge(plan.i, plan.j)
        t = e.time + self.actual_extra.get((plan.i, plan.j), 0.0)
        return LegOutcome(eta=t, duration=t)


class MotionExecutor:
    """Full motion layer: plans a spline path for every leg in the live
    environment snapshot.

    The predicted locomotion time (path length / speed) is compared
    against the edge estimate, which includes the task service time, so
    the service time acts as the leg's detour slack; the consumed duration
    adds the service time back on top of the locomotion time. In this
    simulation the vehicle follows the planned path exactly, so realized
    times equal predictions.
    """

    def __init__(self, limits: VehicleLimits | None = None,
                 cfg: EngineConfig | None = None,
                 rng: np.random.Generator | None = None,
                 n_ctrl: int = 5, m_samples: int = DEFAULT_SAMPLES,
                 phi: PathPhi | None = None, q: np.ndarray | None = None):
        self.limits = limits if limits is not None else VehicleLimits()
        self.cfg = cfg
        self.rng = rng if rng is not None else np.random.default_rng()
        self.n_ctrl = n_ctrl
        self.m_samples = m_samples
        self.phi = phi
        self.q = q

    def prepare(self, graph, i, j, env, sim_time):
        grid = env.grid if env is not None else None
        fld = env.field if env is not None else None
        obstacles = env.obstacles if env is not None else None
        # Obstacle margins inflate with observation staleness, which is the
        # time since the snapshot was taken, not absolute mission time.
        stale = max(sim_time - env.time_s, 0.0) if env is not None else 0.0
        pa = graph.waypoints[i].position
        pb = graph.waypoints[j].position
        sol = plan_path(grid, fld, obstacles, pa, pb, limits=self.limits,
                        cfg=self.cfg, rng=self.rng, n_ctrl=self.n_ctrl,
                        m_samples=self.m_samples, phi=self.phi, q=self.q,
                        elapsed=stale)
        e = graph.edge(i, j)
        delta = e.task.delta if e.task is not None else 0.0
        return LegPlan(i=i, j=j, eta=sol.duration,
                       duration=sol.duration + delta, path_cost=sol.cost,
                       straight_dist=e.distance,
                       lambda_total=sol.lambdas.total_raw, solution=sol)

    def traverse(self, graph, plan, env, sim_time):
        return LegOutcome(eta=plan.eta, duration=plan.duration)


# -- executive state and report ------------------------------------------------


@dataclass
class SynchronState:
    """Mutable driver state; the executive is its only writer."""

    t_v: float
    here: int
    graph: TaskGraph                       # active (possibly pruned) graph
    plan: MissionPlan | None = None
    leg_index: int = 0
    rep: int = 0
    ledger: list[float] = field(default_factory=list)  # ordered charges
    motion_cpu: list[float] = field(default_factory=list)
    mission_cpu: list[float] = field(default_factory=list)
    compute_log: list[float] = field(default_factory=list)  # re-plan CPU

    @property
    def t_nabla(self) -> float:
        return self.t_v - math.fsum(self.ledger)

    def charge(self, amount: float) -> None:
        if amount < 0:
            raise ValueError("budget charges must be non-negative")
        self.ledger.append(float(amount))


@dataclass
class LegRecord:
    i: int
    j: int
    t_eps: float           # edge estimate
    t_planned: float       # motion layer prediction
    t_actual: float        # realized leg time
    duration: float        # budget consumed
    path_cost: float
    straight_dist: float
    lambda_total: float
    cpu_s: float
    t_start: float         # simulation timestamps
    t_end: float


@dataclass
class PlanEvent:
    kind: str              # "initial" or "replan"
    reason: str            # "", "planned-time" or "actual-time"
    at_node: int
    sim_time: float
    budget: float
    route: list[int]
    route_time: float
    route_cost: float
    cpu_s: float

    @property
    def stations(self) -> int:
        return len(self.route)


@dataclass
class MissionReport:
    t_v: float
    engine: str
    outcome: str
    resultant_route: list[int]
    legs: list[LegRecord]
    plans: list[PlanEvent]
    rep: int
    t_r: float
    t_remained: float
    t_nabla_final: float
    mission_cost: float
    c_nabla: float
    motion_cpu: list[float]
    mission_cpu: list[float]
    compute_log: list[float]
    charges: list[float]    # planning charges actually taken from the budget
    sim_time: float
    env_steps: int

    @property
    def leg_pairs(self) -> list[tuple[float, float]]:
        """Per-leg (estimated, realized) time pairs."""
        return [(lr.t_eps, lr.t_actual) for lr in self.legs]

    @property
    def success(self) -> bool:
        return self.outcome == SUCCESS


def total_cost(report: MissionReport, graph: TaskGraph | None = None,
               phi: PhiWeights | None = None) -> float:
    """Mission cost scaled by the mean path-quality factor, plus all motion
    planning CPU time and all re-plan compute time.

    The path-quality factor of a leg is its path cost over its straight
    distance; with stubbed clocks the CPU terms vanish and the total
    reduces to the scaled mission cost. When `graph` is given the mission
    cost is recomputed from the resultant route; otherwise the report's
    stored value is used.
    """
    if graph is not None and len(report.resultant_route) >= 2:
        c_r = route_cost(graph, report.resultant_route, report.t_v, phi).cost
    else:
        c_r = report.mission_cost
    if report.legs:
        f = float(np.mean([lr.path_cost / lr.straight_dist
                           for lr in report.legs]))
    else:
        f = 0.0
    return c_r * f + math.fsum(report.motion_cpu) + math.fsum(report.compute_log)


# -- the driver ----------------------------------------------------------------


def run_mission(graph: TaskGraph, t_v: float,
                executor: LegExecutor | None = None,
                cfg: EngineConfig | None = None,
                rng: np.random.Generator | None = None,
                env: EnvSnapshot | None = None,
                phi: PhiWeights | None = None,
                clock=None, charge_planning: bool = True) -> MissionReport:
    """Run one full mission: plan, traverse leg by leg, re-plan on lost
    time, and account every second against the budget.

    The environment snapshot, when given, evolves one step per elapsed
    quantum of simulated time and is passed to the motion layer read-only.
    Planning wall time (measured with `clock`, default perf_counter) is
    charged against the budget unless charge_planning is False; pass a
    stub clock for exact deterministic ledgers.
    """
    if t_v <= 0:
        raise ValueError("t_v must be positive")
    if executor is None:
        executor = GraphTimeExecutor()
    if rng is None:
        rng = np.random.default_rng()
    if clock is None:
        clock = time.perf_counter

    state = SynchronState(t_v=t_v, here=graph.start, graph=graph)
    legs: list[LegRecord] = []
    plans: list[PlanEvent] = []
    charges: list[float] = []
    passed_edges: list[tuple[int, int]] = []
    visited: list[int] = [graph.start]
    sim_time = 0.0
    env_steps = 0
    outcome: str | None = None
    engine = type(cfg).__name__.removesuffix("Config").lower() if cfg else "de"

    def charge_planning_time(dt: float) -> None:
        if charge_planning and dt != 0.0:
            state.charge(dt)
            charges.append(dt)

    def make_plan(kind: str, reason: str) -> bool:
        """Plan or re-plan from the current waypoint; False when the
        remaining graph admits no route."""
        budget = state.t_nabla
        t0 = clock()
        try:
            if kind == "initial":
                plan = plan_mission(graph, budget, cfg=cfg, rng=rng, phi=phi,
                                    clock=clock)
                active = graph
            else:
                active, plan = replan_mission(graph, passed_edges, visited,
                                              state.here, budget, cfg=cfg,
                                              rng=rng, phi=phi, clock=clock)
        except PlanningInfeasible:
            dt = clock() - t0
            state.mission_cpu.append(dt)
            charge_planning_time(dt)
            return False
        dt = clock() - t0
        state.mission_cpu.append(dt)
        charge_planning_time(dt)
        if kind != "initial":
            state.rep += 1
            state.compute_log.append(dt)
        state.plan = plan
        state.graph = active
        state.leg_index = 0
        plans.append(PlanEvent(kind=kind, reason=reason, at_node=state.here,
                               sim_time=sim_time, budget=budget,
                               route=list(plan.route), route_time=plan.time,
                               route_cost=plan.cost, cpu_s=dt))
        return True

    def advance_env(new_sim_time: float) -> None:
        nonlocal env, env_steps
        if env is None:
            return
        while env.time_s + env.quantum <= new_sim_time:
            env = evolve_env(env, rng)
            env_steps += 1

    if graph.start == graph.destination:
        outcome = SUCCESS
    elif not make_plan("initial", ""):
        outcome = INFEASIBLE

    edges_since_plan = 0
    max_iters = 4 * graph.n_nodes + 8
    iters = 0
    while outcome is None and state.here != graph.destination:
        iters += 1
        if iters > max_iters:
            raise RuntimeError("executive stopped making progress")
        if state.t_nabla < 0:
            outcome = TIMEOUT
            break
        route = state.plan.route
        i, j = route[state.leg_index], route[state.leg_index + 1]
        e = graph.edge(i, j)

        t0 = clock()
        leg_plan = executor.prepare(state.graph, i, j, env, sim_time)
        dt_prep = clock() - t0
        state.motion_cpu.append(dt_prep)
        charge_planning_time(dt_prep)

        if edges_since_plan >= 1 and check_replan(leg_plan.eta, e.time) == REPLAN:
            if not make_plan("replan", "planned-time"):
                outcome = INFEASIBLE
                break
            edges_since_plan = 0
            continue

        out = executor.traverse(state.graph, leg_plan, env, sim_time)
        state.charge(out.duration)
        t_start = sim_time
        sim_time += out.duration
        advance_env(sim_time)
        legs.append(LegRecord(i=i, j=j, t_eps=e.time, t_planned=leg_plan.eta,
                              t_actual=out.eta, duration=out.duration,
                              path_cost=leg_plan.path_cost,
                              straight_dist=leg_plan.straight_dist,
                              lambda_total=leg_plan.lambda_total,
                              cpu_s=dt_prep, t_start=t_start, t_end=sim_time))
        passed_edges.append((i, j))
        visited.append(j)
        state.here = j
        state.leg_index += 1
        edges_since_plan += 1

        if state.here == graph.destination:
            break
        if state.t_nabla < 0:
            outcome = TIMEOUT
            break
        if check_replan(out.eta, e.time) == REPLAN:
            if not make_plan("replan", "actual-time"):
                outcome = INFEASIBLE
                break
            edges_since_plan = 0

    resultant = list(visited)
    t_r = float(sum(graph.edge(a, b).time for a, b in passed_edges))
    t_rem = remaining_time(t_v, t_r)
    if outcome is None:
        outcome = SUCCESS if (state.here == graph.destination and t_rem >= 0) \
            else TIMEOUT

    if len(resultant) >= 2:
        mission_cost = route_cost(graph, resultant, t_v, phi).cost
    else:
        mission_cost = 0.0

    report = MissionReport(
        t_v=t_v, engine=engine, outcome=outcome, resultant_route=resultant,
        legs=legs, plans=plans, rep=state.rep, t_r=t_r, t_remained=t_rem,
        t_nabla_final=state.t_nabla, mission_cost=mission_cost, c_nabla=0.0,
        motion_cpu=state.motion_cpu, mission_cpu=state.mission_cpu,
        compute_log=state.compute_log, charges=charges, sim_time=sim_time,
        env_steps=env_steps,
    )
    report.c_nabla = total_cost(report)
    return report


# -- serialisation ------------------------------------------------------------


def report_to_dict(report: MissionReport) -> dict:
    return {
        "t_v": report.t_v,
        "engine": report.engine,
        "outcome": report.outcome,
        "resultant_route": report.resultant_route,
        "rep": report.rep,
        "t_r": report.t_r,
        "t_remained": report.t_remained,
        "t_nabla_final": report.t_nabla_final,
        "mission_cost": report.mission_cost,
        "c_nabla": report.c_nabla,
        "sim_time": report.sim_time,
        "env_steps": report.env_steps,
        "legs": [
            {"i": lr.i, "j": lr.j, "t_eps": lr.t_eps,
             "t_planned": lr.t_planned, "t_actual": lr.t_actual,
             "duration": lr.duration, "path_cost": lr.path_cost,
             "straight_dist": lr.straight_dist,
             "lambda_total": lr.lambda_total, "cpu_s": lr.cpu_s,
             "t_start": lr.t_start, "t_end": lr.t_end}
            for lr in report.legs
        ],
        "plans": [
            {"kind": pe.kind, "reason": pe.reason, "at_node": pe.at_node,
             "sim_time": pe.sim_time, "budget": pe.budget,
             "route": pe.route, "route_time": pe.route_time,
             "route_cost": pe.route_cost, "stations": pe.stations,
             "cpu_s": pe.cpu_s}
            for pe in report.plans
        ],
        "motion_cpu": report.motion_cpu,
        "mission_cpu": report.mission_cpu,
        "compute_log": report.compute_log,
        "charges": report.charges,
    }


def report_from_dict(d: dict) -> MissionReport:
    legs = [LegRecord(**leg) for leg in d["legs"]]
    plans = [PlanEvent(**{k: v for k, v in pe.items() if k != "stations"})
             for pe in d["plans"]]
    return MissionReport(
        t_v=d["t_v"], engine=d["engine"], outcome=d["outcome"],
        resultant_route=list(d["resultant_route"]), legs=legs, plans=plans,
        rep=d["rep"], t_r=d["t_r"], t_remained=d["t_remained"],
        t_nabla_final=d["t_nabla_final"], mission_cost=d["mission_cost"],
        c_nabla=d["c_nabla"], motion_cpu=list(d["motion_cpu"]),
        mission_cpu=list(d["mission_cpu"]),
        compute_log=list(d["compute_log"]), charges=list(d["charges"]),
        sim_time=d["sim_time"], env_steps=d["env_steps"])


def save_report_json(report: MissionReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, sort_keys=True, indent=1)


def load_report_json(path) -> MissionReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))


REPORT_CSV_HEADER = (
    "run,engine,outcome,plans,rep,stations,legs,t_r,t_remained,"
    "t_nabla_final,c_nabla,sum_leg_time,sum_charges,wall_ms"
)


def report_csv_row(report: MissionReport, run_id: int,
                   wall_ms: float = 0.0) -> str:
    """One summary line per mission; wall_ms is the only wall-clock column."""
    cells = [
        str(run_id), report.engine, report.outcome, str(len(report.plans)),
        str(report.rep), str(len(report.resultant_route)),
        str(len(report.legs)), repr(report.t_r), repr(report.t_remained),
        repr(report.t_nabla_final), repr(report.c_nabla),
        repr(math.fsum(lr.duration for lr in report.legs)),
        repr(math.fsum(report.charges)), repr(wall_ms),
    ]
    return ",".join(cells)
