"""Task waypoint graphs and priority-vector route decoding.

A mission is a set of underwater tasks attached to edges of an undirected
waypoint graph. Routes are encoded for the optimisers as continuous priority
vectors, one entry per waypoint in [-100, 100]: starting at the start node,
repeatedly move to the unvisited neighbour with the highest priority until
the destination is reached (a Route) or no unvisited neighbour exists (a
dead end). Visited nodes are masked out, which also rules out repeating an
edge. Ties break to the lower waypoint id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

PRIORITY_LOW = -100.0
PRIORITY_HIGH = 100.0

DEFAULT_SPEED = 2.5          # m/s cruise speed used for edge travel times
TASK_RHO_RANGE = (1.0, 10.0)
TASK_XI_RANGE = (0.0, 100.0)
TASK_XI_MIN = 0.5            # xi clamp floor so weights stay finite
TASK_DELTA_RANGE = (20.0, 200.0)


@dataclass
class Task:
    """An assignable task: priority rho, risk xi, completion time delta (s)."""

    rho: float
    xi: float
    delta: float

    @property
    def weight(self) -> float:
        return self.rho / self.xi


@dataclass
class Waypoint:
    id: int
    x: float
    y: float
    z: float

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass
class Edge:
    i: int
    j: int
    distance: float
    time: float          # distance / speed + task delta (0 when no task)
    weight: float        # rho / xi for task edges, 1 otherwise
    task: Task | None = None


@dataclass
class TaskGraph:
    """Undirected waypoint graph with optional per-edge tasks."""

    waypoints: dict[int, Waypoint]
    edges: dict[tuple[int, int], Edge]     # keyed by (min(i,j), max(i,j))
    start: int
    destination: int
    speed: float = DEFAULT_SPEED

    # Derived, built lazily: contiguous-index matrices for batch decoding.
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        for (i, j) in self.edges:
            if i >= j:
                raise ValueError(f"edge key ({i}, {j}) must satisfy i < j")
            if i not in self.waypoints or j not in self.waypoints:
                raise ValueError(f"edge ({i}, {j}) references a missing waypoint")
        if self.start not in self.waypoints or self.destination not in self.waypoints:
            raise ValueError("start/destination must be waypoints")

    # -- id/index mapping ---------------------------------------------------

    @property
    def node_ids(self) -> list[int]:
        if "ids" not in self._cache:
            self._cache["ids"] = sorted(self.waypoints)
        return self._cache["ids"]

    @property
    def n_nodes(self) -> int:
        return len(self.waypoints)

    def index_of(self, node_id: int) -> int:
        if "id_to_idx" not in self._cache:
            self._cache["id_to_idx"] = {nid: k for k, nid in enumerate(self.node_ids)}
        return self._cache["id_to_idx"][node_id]

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def edge(self, i: int, j: int) -> Edge:
        return self.edges[(min(i, j), max(i, j))]

    def neighbors(self, i: int) -> list[int]:
        self._matrices()
        return self._cache["adj_lists"][self.index_of(i)]

    # -- matrices for vectorised decode/cost --------------------------------

    def _matrices(self):
        if "adj" in self._cache:
            return self._cache
        n = self.n_nodes
        ids = self.node_ids
        idx = {nid: k for k, nid in enumerate(ids)}
        adj = np.zeros((n, n), dtype=bool)
        t = np.zeros((n, n))
        w = np.zeros((n, n))
        rho = np.zeros((n, n))
        xi = np.ones((n, n))
        has_task = np.zeros((n, n), dtype=bool)
        for (i, j), e in self.edges.items():
            a, b = idx[i], idx[j]
            adj[a, b] = adj[b, a] = True
            t[a, b] = t[b, a] = e.time
            w[a, b] = w[b, a] = e.weight
            if e.task is not None:
                has_task[a, b] = has_task[b, a] = True
                rho[a, b] = rho[b, a] = e.task.rho
                xi[a, b] = xi[b, a] = e.task.xi
        adj_lists = [sorted(int(ids[k]) for k in np.flatnonzero(adj[r]))
                     for r in range(n)]
        self._cache.update(adj=adj, t=t, w=w, rho=rho, xi=xi,
                           has_task=has_task, adj_lists=adj_lists,
                           id_to_idx=idx)
        return self._cache

    def time_matrix(self) -> np.ndarray:
        return self._matrices()["t"]

    def invalidate(self) -> None:
        self._cache = {}


# -- tasks and network construction ------------------------------------------


def generate_tasks(count: int, rng: np.random.Generator) -> list[Task]:
    """Draw tasks with priority ~ U(1, 10), risk ~ U(0, 100) floored at 0.5,
    completion time ~ U(20, 200) s."""
    tasks = []
    for _ in range(count):
        rho = float(rng.uniform(*TASK_RHO_RANGE))
        xi = max(float(rng.uniform(*TASK_XI_RANGE)), TASK_XI_MIN)
        delta = float(rng.uniform(*TASK_DELTA_RANGE))
        tasks.append(Task(rho=rho, xi=xi, delta=delta))
    return tasks


def build_network(grid, n_nodes: int, rng: np.random.Generator,
                  n_tasks: int = 30, target_degree: float = 6.0,
                  speed: float = DEFAULT_SPEED, z_max: float = 100.0,
                  max_feasibility_tries: int = 200) -> TaskGraph:
    """Scatter waypoints over water cells and wire a connected task network.

    Positions are uniform over the grid extent (z uniform in [0, z_max]),
    re-drawn until the (x, y) cell is water. Each node links to its four
    nearest neighbours; components are then bridged by their closest node
    pairs and random extra edges are added until the average degree reaches
    `target_degree`. Tasks go to distinct random edges. The start and
    destination are the farthest-apart pair, and construction fails if no
    random priority vector decodes to a route between them.
    """
    if n_nodes < 2:
        raise ValueError("need at least two waypoints")
    ex, ey = grid.extent
    positions = np.empty((n_nodes, 3))
    for k in range(n_nodes):
        while True:
            x, y = rng.uniform(0, ex), rng.uniform(0, ey)
            if grid.is_water(x, y):
                break
        positions[k] = (x, y, rng.uniform(0.0, z_max))

    ids = list(range(1, n_nodes + 1))
    waypoints = {ids[k]: Waypoint(ids[k], *positions[k]) for k in range(n_nodes)}

    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)

    pairs: set[tuple[int, int]] = set()
    k_nn = min(4, n_nodes - 1)
    order = np.argsort(dist, axis=1)
    for a in range(n_nodes):
        for b in order[a, :k_nn]:
            pairs.add((min(a, int(b)), max(a, int(b))))

    _bridge_components(pairs, dist, n_nodes)

    target_edges = int(target_degree * n_nodes / 2)
    all_pairs = [(a, b) for a in range(n_nodes) for b in range(a + 1, n_nodes)]
    rng.shuffle(all_pairs)
    for (a, b) in all_pairs:
        if len(pairs) >= target_edges:
            break
        pairs.add((a, b))

    pair_list = sorted(pairs)
    n_tasks = min(n_tasks, len(pair_list))
    task_slots = rng.choice(len(pair_list), size=n_tasks, replace=False)
    tasks = generate_tasks(n_tasks, rng)
    task_by_slot = {int(s): tk for s, tk in zip(task_slots, tasks)}

    edges: dict[tuple[int, int], Edge] = {}
    for slot, (a, b) in enumerate(pair_list):
        i, j = ids[a], ids[b]
        d = float(dist[a, b])
        task = task_by_slot.get(slot)
        delta = task.delta if task else 0.0
        weight = task.weight if task else 1.0
        edges[(min(i, j), max(i, j))] = Edge(
            i=min(i, j), j=max(i, j), distance=d,
            time=d / speed + delta, weight=weight, task=task,
        )

    a, b = np.unravel_index(np.argmax(np.where(np.isinf(dist), -1, dist)),
                            dist.shape)
    g = TaskGraph(waypoints=waypoints, edges=edges,
                  start=ids[int(a)], destination=ids[int(b)], speed=speed)

    for _ in range(max_feasibility_tries):
        u = rng.uniform(PRIORITY_LOW, PRIORITY_HIGH, size=g.n_nodes)
        if decode_route(g, u) is not None:
            return g
    raise ValueError(
        f"no decodable route from {g.start} to {g.destination} found in "
        f"{max_feasibility_tries} tries; graph too hostile"
    )


def _bridge_components(pairs: set[tuple[int, int]], dist: np.ndarray,
                       n_nodes: int) -> None:
    """Union components with their closest cross pairs until connected."""
    parent = list(range(n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (a, b) in pairs:
        parent[find(a)] = find(b)
    while True:
        roots = {find(x) for x in range(n_nodes)}
        if len(roots) == 1:
            return
        comp = find(0)
        inside = [x for x in range(n_nodes) if find(x) == comp]
        outside = [x for x in range(n_nodes) if find(x) != comp]
        sub = dist[np.ix_(inside, outside)]
        ai, bi = np.unravel_index(np.argmin(sub), sub.shape)
        a, b = inside[int(ai)], outside[int(bi)]
        pairs.add((min(a, b), max(a, b)))
        parent[find(a)] = find(b)


# -- route decoding -----------------------------------------------------------


def decode_route(g: TaskGraph, u: np.ndarray) -> list[int] | None:
    """Greedy priority walk; returns the route as node ids, or None on a
    dead end. `u` has one priority per waypoint, in node-id order."""
    u = np.asarray(u, dtype=float)
    if u.shape != (g.n_nodes,):
        raise ValueError(f"priority vector must have {g.n_nodes} entries")
    cache = g._matrices()
    adj = cache["adj"]
    idx = g.index_of(g.start)
    dest = g.index_of(g.destination)
    ids = g.node_ids
    visited = np.zeros(g.n_nodes, dtype=bool)
    visited[idx] = True
    route = [g.start]
    while idx != dest:
        scores = np.where(adj[idx] & ~visited, u, -np.inf)
        nxt = int(np.argmax(scores))
        if scores[nxt] == -np.inf:
            return None
        visited[nxt] = True
        route.append(ids[nxt])
        idx = nxt
    return route


def decode_batch(g: TaskGraph, U: np.ndarray):
    """Decode a population of priority vectors at once.

    Returns (routes, lengths, ok): routes is (P, n_nodes) of node indices
    padded with -1, lengths counts nodes in each route, ok marks rows that
    reached the destination. Matches `decode_route` row by row.
    """
    U = np.asarray(U, dtype=float)
    P, n = U.shape
    if n != g.n_nodes:
        raise ValueError(f"priority vectors must have {g.n_nodes} entries")
    cache = g._matrices()
    adj = cache["adj"]
    start = g.index_of(g.start)
    dest = g.index_of(g.destination)

    routes = np.full((P, n), -1, dtype=np.int64)
    routes[:, 0] = start
    lengths = np.ones(P, dtype=np.int64)
    current = np.full(P, start, dtype=np.int64)
    visited = np.zeros((P, n), dtype=bool)
    visited[:, start] = True
    active = np.full(P, True)
    active &= current != dest
    rows = np.arange(P)

    for step in range(1, n):
        if not active.any():
            break
        cand = adj[current] & ~visited
        scores = np.where(cand, U, -np.inf)
        nxt = scores.argmax(axis=1)
        stuck = ~np.isfinite(scores[rows, nxt])
        move = active & ~stuck
        routes[move, step] = nxt[move]
        lengths[move] += 1
        visited[move, nxt[move]] = True
        current = np.where(move, nxt, current)
        active = move & (current != dest)

    ok = current == dest
    return routes, lengths, ok


def validate_route(g: TaskGraph, route: list[int], t_budget: float | None = None
                   ) -> list[str]:
    """Return the list of criteria the route violates (empty when valid):
    endpoints, missing-edge, repeated-node, repeated-edge and, when a budget
    is given, time-budget."""
    violations: list[str] = []
    if not route or route[0] != g.start or route[-1] != g.destination:
        violations.append("endpoints")
    if len(set(route)) != len(route):
        violations.append("repeated-node")
    seen_edges = set()
    total = 0.0
    for a, b in zip(route[:-1], route[1:]):
        if not g.has_edge(a, b):
            if "missing-edge" not in violations:
                violations.append("missing-edge")
            continue
        key = (min(a, b), max(a, b))
        if key in seen_edges and "repeated-edge" not in violations:
            violations.append("repeated-edge")
        seen_edges.add(key)
        total += g.edge(a, b).time
    if t_budget is not None and total > t_budget:
        violations.append("time-budget")
    return violations


def prune_graph(g: TaskGraph, passed_edges: list[tuple[int, int]],
                visited: list[int], here: int) -> TaskGraph:
    """Sub-graph for re-planning: drop traversed edges and visited nodes
    except the current one; the new start is `here`."""
    drop_nodes = {v for v in visited if v != here}
    if here in drop_nodes:
        raise ValueError("current node cannot be pruned")
    passed = {(min(a, b), max(a, b)) for a, b in passed_edges}
    waypoints = {nid: wp for nid, wp in g.waypoints.items()
                 if nid not in drop_nodes}
    edges = {key: e for key, e in g.edges.items()
             if key not in passed
             and key[0] not in drop_nodes and key[1] not in drop_nodes}
    if here not in waypoints:
        raise ValueError(f"current node {here} is not in the graph")
    return TaskGraph(waypoints=waypoints, edges=edges, start=here,
                     destination=g.destination, speed=g.speed)


# -- serialisation ------------------------------------------------------------


def graph_to_dict(g: TaskGraph) -> dict:
    return {
        "start": g.start,
        "destination": g.destination,
        "speed": g.speed,
        "waypoints": [
            {"id": wp.id, "x": wp.x, "y": wp.y, "z": wp.z}
            for wp in (g.waypoints[i] for i in sorted(g.waypoints))
        ],
        "edges": [
            {
                "i": e.i, "j": e.j, "distance": e.distance, "time": e.time,
                "weight": e.weight,
                "task": None if e.task is None else
                {"rho": e.task.rho, "xi": e.task.xi, "delta": e.task.delta},
            }
            for key in sorted(g.edges) for e in (g.edges[key],)
        ],
    }


def graph_from_dict(d: dict) -> TaskGraph:
    waypoints = {w["id"]: Waypoint(w["id"], w["x"], w["y"], w["z"])
                 for w in d["waypoints"]}
    edges = {}
    for e in d["edges"]:
        task = Task(**e["task"]) if e["task"] else None
        edges[(e["i"], e["j"])] = Edge(i=e["i"], j=e["j"], distance=e["distance"],
                                       time=e["time"], weight=e["weight"],
                                       task=task)
    return TaskGraph(waypoints=waypoints, edges=edges, start=d["start"],
                     destination=d["destination"], speed=d["speed"])


def save_graph_json(g: TaskGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(g), fh, sort_keys=True, indent=1)


def load_graph_json(path) -> TaskGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
