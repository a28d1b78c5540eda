"""Layered vortex current field: velocities, interpolation, evolution."""

from __future__ import annotations

import numpy as np
import pytest

from armpa.env.currents import (
    CurrentField,
    CurrentLayer,
    CurrentNoise,
    Vortex,
    current_at,
    current_at_batch,
    evolve_current,
    make_current_field,
    vortex_tangential_speed,
)

EXTENT = (1000.0, 1000.0)


def one_vortex_field(strength: float = 500.0, radius: float = 100.0,
                     gamma: float = 0.05) -> CurrentField:
    vor = Vortex(x=500.0, y=500.0, strength=strength, radius=radius,
                 gamma=gamma)
    return CurrentField(extent=EXTENT,
                        layers=[CurrentLayer(depth=0.0, vortices=[vor])])


def test_vortex_requires_positive_radius():
    with pytest.raises(ValueError):
        Vortex(x=0.0, y=0.0, strength=1.0, radius=0.0, gamma=0.0)


def test_tangential_speed_profile():
    s, rad = 400.0, 120.0
    assert vortex_tangential_speed(s, rad, 0.0) == 0.0
    v_in = vortex_tangential_speed(s, rad, 30.0)
    v_core = vortex_tangential_speed(s, rad, rad)
    assert 0.0 < v_in < v_core
    # Far field decays toward the free-vortex profile s / (2 pi r).
    r_far = 12.0 * rad
    free = s / (2.0 * np.pi * r_far)
    assert abs(vortex_tangential_speed(s, rad, r_far) - free) < 1e-9 * free


def test_velocity_is_tangential_and_counterclockwise():
    field = one_vortex_field()
    east = current_at(field, np.array([700.0, 500.0, 0.0]))
    assert east[0] == 0.0 and east[1] > 0.0
    north = current_at(field, np.array([500.0, 700.0, 0.0]))
    assert north[1] == 0.0 and north[0] < 0.0
    # Clockwise when the strength is negative.
    cw = one_vortex_field(strength=-500.0)
    east_cw = current_at(cw, np.array([700.0, 500.0, 0.0]))
    assert east_cw[1] < 0.0


def test_upwelling_peaks_at_the_core():
    field = one_vortex_field(gamma=0.1)
    core = current_at(field, np.array([500.0, 500.0, 0.0]))
    off = current_at(field, np.array([800.0, 500.0, 0.0]))
    assert core[2] > 0.0
    assert core[2] > off[2]


def test_batch_matches_scalar_lookup():
    rng = np.random.default_rng(0)
    field = make_current_field(EXTENT, rng)
    pts = rng.uniform((0.0, 0.0, 0.0), (1000.0, 1000.0, 100.0), size=(40, 3))
    batch = current_at_batch(field, pts)
    assert batch.shape == (40, 3)
    for p, vel in zip(pts, batch):
        assert np.array_equal(current_at(field, p), vel)


def test_single_point_input_squeezes():
    field = one_vortex_field()
    out = current_at_batch(field, np.array([600.0, 500.0, 0.0]))
    assert out.shape == (3,)


def test_out_of_domain_positions_raise():
    field = one_vortex_field()
    with pytest.raises(ValueError):
        current_at(field, np.array([-5.0, 500.0, 0.0]))
    with pytest.raises(ValueError):
        current_at(field, np.array([500.0, 500.0, 50.0]))  # below the layer


def test_depth_interpolation_blends_layers():
    shallow = CurrentLayer(depth=0.0, vortices=[
        Vortex(x=500.0, y=500.0, strength=600.0, radius=100.0, gamma=0.0)])
    deep = CurrentLayer(depth=100.0, vortices=[
        Vortex(x=500.0, y=500.0, strength=200.0, radius=100.0, gamma=0.0)])
    field = CurrentField(extent=EXTENT, layers=[shallow, deep])
    p_top = np.array([700.0, 500.0, 0.0])
    p_bot = np.array([700.0, 500.0, 100.0])
    p_mid = np.array([700.0, 500.0, 50.0])
    v_top = current_at(field, p_top)
    v_bot = current_at(field, p_bot)
    v_mid = current_at(field, p_mid)
    assert v_top[1] > v_bot[1] > 0.0
    assert np.allclose(v_mid, 0.5 * (v_top + v_bot), rtol=1e-12)
    # Layer order in the constructor must not matter.
    flipped = CurrentField(extent=EXTENT, layers=[deep, shallow])
    assert np.array_equal(current_at(flipped, p_mid), v_mid)


def test_make_current_field_shape():
    rng = np.random.default_rng(1)
    field = make_current_field(EXTENT, rng)
    assert len(field.layers) == 11
    assert field.depth_range == (0.0, 100.0)
    counts = {len(layer.vortices) for layer in field.layers}
    assert len(counts) == 1
    assert counts.pop() in range(5, 9)
    for layer in field.layers:
        for vor in layer.vortices:
            assert 150.0 <= vor.radius <= 400.0
            assert 200.0 <= abs(vor.strength) <= 700.0


def test_evolve_current_perturbs_copy_only():
    rng = np.random.default_rng(2)
    field = make_current_field(EXTENT, rng)
    before = [(v.x, v.y, v.strength, v.radius)
              for layer in field.layers for v in layer.vortices]
    evolved = evolve_current(field, rng, CurrentNoise())
    after = [(v.x, v.y, v.strength, v.radius)
             for layer in field.layers for v in layer.vortices]
    assert before == after  # input untouched
    moved = [(v.x, v.y, v.strength, v.radius)
             for layer in evolved.layers for v in layer.vortices]
    assert moved != before
    assert all(v.radius >= 1e-6
               for layer in evolved.layers for v in layer.vortices)
