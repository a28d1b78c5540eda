"""Waypoint graph: construction, priority decoding, validation, pruning."""

from __future__ import annotations

import numpy as np
import pytest

from armpa.fixtures import replay_graph, water_grid
from armpa.graph import (
    Edge,
    Task,
    TaskGraph,
    Waypoint,
    build_network,
    decode_batch,
    decode_route,
    graph_from_dict,
    graph_to_dict,
    load_graph_json,
    prune_graph,
    save_graph_json,
    validate_route,
)


def diamond(extra_pendant: bool = False) -> TaskGraph:
    """1 -> 4 with two parallel branches, a cross edge and one task."""
    ids = (1, 2, 3, 4, 5) if extra_pendant else (1, 2, 3, 4)
    wps = {i: Waypoint(id=i, x=float(i) * 100.0, y=0.0, z=0.0) for i in ids}
    task = Task(rho=4.0, xi=2.0, delta=30.0)
    edges = {
        (1, 2): Edge(1, 2, 250.0, 100.0, 1.0),
        (1, 3): Edge(1, 3, 375.0, 150.0, 1.0),
        (2, 3): Edge(2, 3, 125.0, 50.0, 1.0),
        (2, 4): Edge(2, 4, 250.0, 130.0, task.weight, task),
        (3, 4): Edge(3, 4, 250.0, 100.0, 1.0),
    }
    if extra_pendant:
        edges[(2, 5)] = Edge(2, 5, 100.0, 40.0, 1.0)
    return TaskGraph(waypoints=wps, edges=edges, start=1, destination=4)


def test_graph_validation():
    wps = {1: Waypoint(1, 0.0, 0.0, 0.0), 2: Waypoint(2, 1.0, 0.0, 0.0)}
    edge = Edge(1, 2, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        TaskGraph(waypoints=wps, edges={(2, 1): edge}, start=1,
                  destination=2)
    with pytest.raises(ValueError):
        TaskGraph(waypoints=wps, edges={(1, 3): edge}, start=1,
                  destination=2)
    with pytest.raises(ValueError):
        TaskGraph(waypoints=wps, edges={(1, 2): edge}, start=1,
                  destination=9)


def test_task_weight_and_edge_lookup():
    g = diamond()
    assert Task(rho=4.0, xi=2.0, delta=0.0).weight == 2.0
    assert g.has_edge(4, 2) and g.edge(4, 2).task is not None
    assert not g.has_edge(1, 4)
    assert sorted(g.neighbors(2)) == [1, 3, 4]
    assert g.n_nodes == 4 and g.node_ids == [1, 2, 3, 4]


def test_decode_follows_highest_priority():
    g = diamond()
    assert decode_route(g, [0.0, 10.0, 5.0, 1.0]) == [1, 2, 3, 4]
    assert decode_route(g, [0.0, 10.0, -5.0, 50.0]) == [1, 2, 4]
    assert decode_route(g, [0.0, -10.0, 5.0, 1.0]) == [1, 3, 4]
    with pytest.raises(ValueError):
        decode_route(g, [1.0, 2.0])


def test_decode_dead_end_returns_none():
    g = diamond(extra_pendant=True)
    assert decode_route(g, [0.0, 10.0, 1.0, 0.0, 99.0]) is None


def test_decode_batch_matches_scalar():
    g = diamond(extra_pendant=True)
    rng = np.random.default_rng(0)
    U = rng.uniform(-100.0, 100.0, size=(64, g.n_nodes))
    routes, lengths, ok = decode_batch(g, U)
    ids = g.node_ids
    for row in range(64):
        scalar = decode_route(g, U[row])
        if scalar is None:
            assert not ok[row]
        else:
            assert ok[row]
            got = [ids[k] for k in routes[row, : lengths[row]]]
            assert got == scalar


def test_validate_route_names_each_violation():
    g = diamond()
    assert validate_route(g, [1, 2, 4]) == []
    assert "endpoints" in validate_route(g, [2, 3, 4])
    assert "missing-edge" in validate_route(g, [1, 4])
    assert "repeated-node" in validate_route(g, [1, 2, 3, 2, 4])
    assert "repeated-edge" in validate_route(g, [1, 2, 3, 2, 4])
    assert "time-budget" in validate_route(g, [1, 2, 4], t_budget=200.0)
    assert validate_route(g, [1, 2, 4], t_budget=230.0) == []


def test_prune_graph_drops_history():
    g = diamond(extra_pendant=True)
    pruned = prune_graph(g, passed_edges=[(1, 2)], visited=[1, 2], here=2)
    assert pruned.start == 2 and pruned.destination == 4
    assert 1 not in pruned.waypoints
    assert not pruned.has_edge(1, 2) and not pruned.has_edge(1, 3)
    assert pruned.has_edge(2, 4) and pruned.has_edge(3, 4)
    assert pruned.n_nodes == 4


def test_build_network_invariants():
    grid = water_grid(60, 60, 10.0)
    rng = np.random.default_rng(5)
    g = build_network(grid, 12, rng, n_tasks=5, target_degree=3.5)
    assert g.node_ids == list(range(1, 13))
    assert g.start != g.destination
    xmax, ymax = grid.extent
    for wp in g.waypoints.values():
        assert grid.is_water(wp.x, wp.y)
        assert 0.0 <= wp.z <= 100.0
    assert sum(1 for e in g.edges.values() if e.task is not None) == 5
    for e in g.edges.values():
        delta = e.task.delta if e.task is not None else 0.0
        assert e.time == pytest.approx(e.distance / g.speed + delta,
                                       rel=1e-12)
        assert e.weight == (e.task.weight if e.task is not None else 1.0)
    # Connectivity: every node reachable from the start.
    seen: set[int] = set()
    stack = [g.start]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        stack.extend(g.neighbors(node))
    assert seen == set(g.node_ids)


def test_build_network_needs_two_waypoints():
    grid = water_grid(10, 10, 10.0)
    with pytest.raises(ValueError):
        build_network(grid, 1, np.random.default_rng(6))


def test_graph_json_round_trip(tmp_path):
    g = diamond()
    d = graph_to_dict(g)
    assert graph_to_dict(graph_from_dict(d)) == d
    path = tmp_path / "graph.json"
    save_graph_json(g, path)
    loaded = load_graph_json(path)
    assert loaded.start == g.start and loaded.destination == g.destination
    assert set(loaded.edges) == set(g.edges)
    assert loaded.edge(2, 4).task.rho == 4.0


def test_replay_graph_times_are_integral():
    g = replay_graph()
    assert g.start == 1 and g.destination == 20
    assert g.n_nodes == 20
    for e in g.edges.values():
        assert float(e.time).is_integer()
