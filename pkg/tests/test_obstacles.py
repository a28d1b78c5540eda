"""Uncertain obstacles and the environment snapshot wrapper."""

from __future__ import annotations

import numpy as np
import pytest

from armpa.env.currents import make_current_field
from armpa.env.obstacles import (
    BUOYANT,
    STATIC,
    Z_CONFIDENCE_98,
    Obstacle,
    ObstacleSpec,
    collision_boundary,
    evolve_obstacles,
    spawn_obstacles,
)
from armpa.env.snapshot import (
    evolve_env,
    load_snapshot_json,
    save_snapshot_json,
    snapshot_from_dict,
    snapshot_to_dict,
)
from armpa.fixtures import scenario_slalom


def make_obstacle(kind=STATIC, radius=30.0, radius_sigma=2.0) -> Obstacle:
    return Obstacle(kind=kind, center=np.zeros(3), radius=radius,
                    radius_nominal=30.0, radius_sigma=radius_sigma,
                    noise_sigma=1.0)


def test_obstacle_validation():
    with pytest.raises(ValueError):
        make_obstacle(radius=-1.0)
    with pytest.raises(ValueError):
        make_obstacle(kind="drifting")


def test_collision_boundary_grows_linearly():
    ob = make_obstacle()
    b0 = collision_boundary(ob)
    assert b0 == 30.0 + Z_CONFIDENCE_98 * 2.0
    b1 = collision_boundary(ob, elapsed=600.0)
    assert b1 == 30.0 + Z_CONFIDENCE_98 * 2.0 * (1.0 + 0.01 * 600.0)
    assert b1 > b0
    with pytest.raises(ValueError):
        collision_boundary(ob, elapsed=-1.0)


def test_spawn_obstacles_fills_the_box():
    rng = np.random.default_rng(0)
    spec = ObstacleSpec(count=40, buoyant_fraction=0.5)
    a = np.array([200.0, 300.0, 10.0])
    b = np.array([1800.0, 1500.0, 90.0])
    obs = spawn_obstacles(spec, a, b, rng)
    assert len(obs) == 40
    kinds = {ob.kind for ob in obs}
    assert kinds == {STATIC, BUOYANT}
    for ob in obs:
        assert np.all(ob.center - ob.radius >= np.minimum(a, b))
        assert np.all(ob.center + ob.radius <= np.maximum(a, b))
        assert ob.radius > 0.0
        assert 0.0 <= ob.radius_sigma <= spec.radius_sigma_max


def test_spawn_rejects_too_small_box():
    rng = np.random.default_rng(1)
    spec = ObstacleSpec(count=2, radius_nominal=50.0)
    with pytest.raises(ValueError):
        spawn_obstacles(spec, np.zeros(3), np.array([40.0, 40.0, 10.0]), rng)


def test_evolution_keeps_static_centers_and_inputs():
    rng = np.random.default_rng(2)
    spec = ObstacleSpec(count=12, buoyant_fraction=0.5)
    a, b = np.array([100.0, 100.0, 10.0]), np.array([900.0, 900.0, 90.0])
    obs = spawn_obstacles(spec, a, b, rng)
    field = make_current_field((1000.0, 1000.0), rng)
    before = [(tuple(ob.center), ob.radius, ob.age) for ob in obs]
    evolved = evolve_obstacles(obs, field, rng)
    assert [(tuple(ob.center), ob.radius, ob.age) for ob in obs] == before
    assert len(evolved) == len(obs)
    for old, new in zip(obs, evolved):
        assert new.age == old.age + 1
        assert new.kind == old.kind
        if new.kind == STATIC:
            assert np.array_equal(new.center, old.center)
    drifted = [not np.array_equal(n.center, o.center)
               for o, n in zip(obs, evolved) if n.kind == BUOYANT]
    assert any(drifted)


def test_snapshot_advances_time_and_grid_stays():
    rng = np.random.default_rng(3)
    scenario = scenario_slalom()
    env = scenario.env
    nxt = evolve_env(env, rng)
    assert nxt.step == env.step + 1
    assert nxt.time_s == env.time_s + env.quantum
    assert nxt.grid is env.grid
    assert env.step == 0 and env.time_s == 0.0


def test_snapshot_round_trip(tmp_path):
    env = scenario_slalom().env
    d = snapshot_to_dict(env)
    back = snapshot_from_dict(d)
    assert back.step == env.step and back.time_s == env.time_s
    assert back.quantum == env.quantum
    assert np.array_equal(back.grid.values, env.grid.values)
    assert np.array_equal(back.grid.labels, env.grid.labels)
    assert len(back.field.layers) == len(env.field.layers)
    for la, lb in zip(env.field.layers, back.field.layers):
        assert la.depth == lb.depth
        for va, vb in zip(la.vortices, lb.vortices):
            assert (va.x, va.y, va.strength, va.radius, va.gamma) == \
                (vb.x, vb.y, vb.strength, vb.radius, vb.gamma)
    assert len(back.obstacles) == len(env.obstacles)
    for oa, ob in zip(env.obstacles, back.obstacles):
        assert np.array_equal(oa.center, ob.center)
        assert (oa.radius, oa.radius_sigma, oa.kind) == \
            (ob.radius, ob.radius_sigma, ob.kind)

    path = tmp_path / "env.json"
    save_snapshot_json(env, path)
    loaded = load_snapshot_json(path)
    assert np.array_equal(loaded.grid.values, env.grid.values)
    assert snapshot_to_dict(loaded) == d
