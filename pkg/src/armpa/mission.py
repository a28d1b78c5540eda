"""Time-budgeted mission routing over a task graph.

A candidate route is scored by how tightly it fills the time budget and how
much task value it collects:

    T_R      = sum of edge times along the route
    Lambda_R = max(1 - T_budget / T_R, 0)          (overtime fraction)
    C_R      = (phi1 * |T_R - T_budget|
                + phi2 / sum(phi3 * rho / (phi4 * xi)))
               * (1 + phi5 * Lambda_R)

Task-free edges contribute 1 to the weight sum. phi1 defaults to
1 / T_budget so the time-gap term is the relative gap. The planner searches
priority-vector space with one of the shared engines; dead-end decodes cost
+inf so greedy selection discards them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from armpa.graph import (
    TaskGraph, decode_route, decode_batch, prune_graph,
    PRIORITY_LOW, PRIORITY_HIGH,
)
from armpa.optim import Problem, OptResult, EngineConfig, optimize, DEConfig

INIT_RETRIES = 50   # fresh random vectors per population slot at init


class PlanningInfeasible(RuntimeError):
    """No feasible plan exists (or none was found where one must exist)."""


@dataclass
class PhiWeights:
    """Mission cost coefficients; phi1 = None means 1 / T_budget."""

    phi1: float | None = None
    phi2: float = 1.0
    phi3: float = 1.0
    phi4: float = 1.0
    phi5: float = 10.0

    def phi1_for(self, t_budget: float) -> float:
        if self.phi1 is not None:
            return self.phi1
        if t_budget <= 0:
            raise ValueError("t_budget must be positive when phi1 is derived")
        return 1.0 / t_budget


@dataclass
class RouteCost:
    cost: float
    time: float
    slack: float          # Lambda_R
    weight_sum: float


@dataclass
class MissionPlan:
    route: list[int]
    cost: float
    time: float
    slack: float
    weight_sum: float
    t_budget: float
    engine: str
    priorities: np.ndarray | None = None
    result: OptResult | None = field(default=None, repr=False)


def route_time(g: TaskGraph, route: list[int]) -> float:
    return float(sum(g.edge(a, b).time for a, b in zip(route[:-1], route[1:])))


def route_slack(t_r: float, t_budget: float) -> float:
    if t_r <= 0:
        return 0.0
    return max(1.0 - t_budget / t_r, 0.0)


def route_cost(g: TaskGraph, route: list[int], t_budget: float,
               phi: PhiWeights | None = None) -> RouteCost:
    """Score one route. The route must traverse existing edges."""
    if phi is None:
        phi = PhiWeights()
    phi1 = phi.phi1_for(t_budget)
    t_r = 0.0
    weight_sum = 0.0
    for a, b in zip(route[:-1], route[1:]):
        e = g.edge(a, b)
        t_r += e.time
        if e.task is not None:
            weight_sum += (phi.phi3 * e.task.rho) / (phi.phi4 * e.task.xi)
        else:
            weight_sum += 1.0
    slack = route_slack(t_r, t_budget)
    cost = (phi1 * abs(t_r - t_budget) + phi.phi2 / weight_sum) \
        * (1.0 + phi.phi5 * slack)
    return RouteCost(cost=float(cost), time=float(t_r), slack=float(slack),
                     weight_sum=float(weight_sum))


def _batch_route_cost(g: TaskGraph, t_budget: float, phi: PhiWeights):
    """Vectorised decode-and-score over a population of priority vectors."""
    cache = g._matrices()
    t_m = cache["t"]
    rho_m = cache["rho"]
    xi_m = cache["xi"]
    task_m = cache["has_task"]
    w_eff = np.where(task_m, (phi.phi3 * rho_m) / (phi.phi4 * xi_m), 1.0)
    phi1 = phi.phi1_for(t_budget)

    def batch(U: np.ndarray) -> np.ndarray:
        routes, lengths, ok = decode_batch(g, U)
        P, n = routes.shape
        a = routes[:, :-1]
        b = routes[:, 1:]
        step_mask = (np.arange(1, n)[None, :] < lengths[:, None])
        safe_a = np.where(a < 0, 0, a)
        safe_b = np.where(b < 0, 0, b)
        t_r = np.where(step_mask, t_m[safe_a, safe_b], 0.0).sum(axis=1)
        w_sum = np.where(step_mask, w_eff[safe_a, safe_b], 0.0).sum(axis=1)
        slack = np.maximum(1.0 - t_budget / np.maximum(t_r, 1e-300), 0.0)
        cost = (phi1 * np.abs(t_r - t_budget) + phi.phi2 / np.maximum(w_sum, 1e-300)) \
            * (1.0 + phi.phi5 * slack)
        return np.where(ok, cost, np.inf)

    return batch


def mission_problem(g: TaskGraph, t_budget: float,
                    phi: PhiWeights | None = None) -> Problem:
    if phi is None:
        phi = PhiWeights()

    def cost(route) -> float:
        if route is None:
            return float("inf")
        return route_cost(g, route, t_budget, phi).cost

    return Problem(
        dimension=g.n_nodes,
        lower=PRIORITY_LOW,
        upper=PRIORITY_HIGH,
        cost=cost,
        decode=lambda u: decode_route(g, u),
        batch_cost=_batch_route_cost(g, t_budget, phi),
    )


def _feasible_init(g: TaskGraph, pop_size: int, rng: np.random.Generator
                   ) -> np.ndarray:
    """Initial population biased toward decodable vectors: each slot draws
    fresh random vectors until one decodes, giving up after a bounded
    number of tries (such slots stay random and cost +inf until the search
    repairs them). Raises only when not one slot decoded, since then the
    optimiser would have no finite-cost member to improve on."""
    X = np.empty((pop_size, g.n_nodes))
    any_ok = False
    for k in range(pop_size):
        for attempt in range(INIT_RETRIES):
            u = rng.uniform(PRIORITY_LOW, PRIORITY_HIGH, size=g.n_nodes)
            X[k] = u
            if decode_route(g, u) is not None:
                any_ok = True
                break
    if not any_ok:
        raise PlanningInfeasible(
            f"could not decode a route from {g.start} to {g.destination} "
            f"in {INIT_RETRIES} tries per slot; graph looks infeasible"
        )
    return X


def plan_mission(g: TaskGraph, t_budget: float, cfg: EngineConfig | None = None,
                 rng: np.random.Generator | None = None,
                 phi: PhiWeights | None = None,
                 warm_start: np.ndarray | None = None,
                 clock=None) -> MissionPlan:
    """Search for the best-scoring route under the budget.

    Raises PlanningInfeasible when no decodable route exists. The returned
    plan may exceed the budget (slack > 0) when nothing better was found;
    callers decide whether that is acceptable.
    """
    if t_budget <= 0:
        raise ValueError("t_budget must be positive")
    if cfg is None:
        cfg = DEConfig()
    if rng is None:
        rng = np.random.default_rng()
    if phi is None:
        phi = PhiWeights()

    problem = mission_problem(g, t_budget, phi)
    if warm_start is None:
        warm = _feasible_init(g, cfg.pop_size, rng)
    else:
        warm = np.atleast_2d(warm_start)
    result = optimize(problem, cfg, rng, warm_start=warm, clock=clock)
    route = decode_route(g, result.best_x)
    if route is None or not np.isfinite(result.best_cost):
        raise PlanningInfeasible("optimiser found no decodable route")
    rc = route_cost(g, route, t_budget, phi)
    return MissionPlan(route=route, cost=rc.cost, time=rc.time, slack=rc.slack,
                       weight_sum=rc.weight_sum, t_budget=t_budget,
                       engine=type(cfg).__name__.removesuffix("Config").lower(),
                       priorities=result.best_x, result=result)


def replan_mission(g: TaskGraph, passed_edges: list[tuple[int, int]],
                   visited: list[int], here: int, t_budget: float,
                   cfg: EngineConfig | None = None,
                   rng: np.random.Generator | None = None,
                   phi: PhiWeights | None = None,
                   clock=None) -> tuple[TaskGraph, MissionPlan]:
    """Prune what was already traversed and plan again from `here`."""
    pruned = prune_graph(g, passed_edges, visited, here)
    if pruned.n_nodes >= g.n_nodes and len(pruned.edges) >= len(g.edges):
        raise ValueError("re-plan requires a strictly smaller graph")
    plan = plan_mission(pruned, t_budget, cfg=cfg, rng=rng, phi=phi, clock=clock)
    return pruned, plan


def enumerate_routes(g: TaskGraph, max_routes: int = 200000) -> list[list[int]]:
    """All simple start-to-destination paths (exhaustive; small graphs only)."""
    routes: list[list[int]] = []
    stack = [(g.start, [g.start], {g.start})]
    while stack:
        node, path, seen = stack.pop()
        if node == g.destination:
            routes.append(path)
            if len(routes) > max_routes:
                raise ValueError("route enumeration exploded; graph too large")
            continue
        for nb in g.neighbors(node):
            if nb not in seen:
                stack.append((nb, path + [nb], seen | {nb}))
    return routes


def best_route_exhaustive(g: TaskGraph, t_budget: float,
                          phi: PhiWeights | None = None
                          ) -> tuple[list[int], RouteCost]:
    """Exhaustive optimum by full enumeration (oracle for small instances)."""
    best = None
    best_rc = None
    for route in enumerate_routes(g):
        rc = route_cost(g, route, t_budget, phi)
        if best_rc is None or rc.cost < best_rc.cost:
            best, best_rc = route, rc
    if best is None:
        raise PlanningInfeasible("graph has no start-to-destination route")
    return best, best_rc


def plan_to_dict(plan: MissionPlan) -> dict:
    return {
        "route": plan.route,
        "cost": plan.cost,
        "time": plan.time,
        "slack": plan.slack,
        "weight_sum": plan.weight_sum,
        "t_budget": plan.t_budget,
        "engine": plan.engine,
        "priorities": None if plan.priorities is None
        else [float(v) for v in plan.priorities],
    }


def plan_from_dict(d: dict) -> MissionPlan:
    pri = None if d["priorities"] is None else np.array(d["priorities"])
    return MissionPlan(route=list(d["route"]), cost=d["cost"], time=d["time"],
                       slack=d["slack"], weight_sum=d["weight_sum"],
                       t_budget=d["t_budget"], engine=d["engine"],
                       priorities=pri)


def save_plan_json(plan: MissionPlan, path) -> None:
    with open(path, "w") as fh:
        json.dump(plan_to_dict(plan), fh, sort_keys=True, indent=1)


def load_plan_json(path) -> MissionPlan:
    with open(path) as fh:
        return plan_from_dict(json.load(fh))
