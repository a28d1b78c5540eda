"""Traversability map: clustering, classification, lookup, CSV round trip."""

from __future__ import annotations

import numpy as np
import pytest

from armpa.env.grid import (
    COAST,
    COAST_VALUE,
    UNCERTAIN,
    WATER,
    WATER_VALUE,
    IntensityGrid,
    TraversabilityGrid,
    classify_grid,
    cluster_map,
    load_grid_csv,
    save_grid_csv,
    synthetic_intensity_map,
)
from armpa.fixtures import water_grid


def tiny_intensity(rng: np.random.Generator) -> IntensityGrid:
    vals = np.concatenate([
        rng.normal(0.1, 0.01, 40), rng.normal(0.5, 0.01, 30),
        rng.normal(0.9, 0.01, 50)]).clip(0.0, 1.0)
    rng.shuffle(vals)
    return IntensityGrid(width=12, height=10, cell_size=5.0,
                         values=vals.reshape(10, 12))


def test_grid_validation():
    with pytest.raises(ValueError):
        IntensityGrid(width=3, height=2, cell_size=1.0,
                      values=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        IntensityGrid(width=3, height=3, cell_size=0.0,
                      values=np.zeros((3, 3)))


def test_cluster_map_recovers_three_bands():
    rng = np.random.default_rng(0)
    img = tiny_intensity(rng)
    model = cluster_map(img.values, 3, rng)
    assert len(model.centroids) == 3
    assert np.all(np.diff(model.centroids) > 0)
    assert abs(model.centroids[0] - 0.1) < 0.05
    assert abs(model.centroids[2] - 0.9) < 0.05
    # Centroids are the means of their members.
    assign = model.assign(img.values.ravel())
    for ci in range(3):
        members = img.values.ravel()[assign == ci]
        assert abs(members.mean() - model.centroids[ci]) < 1e-9


def test_cluster_map_single_cluster_is_global_mean():
    rng = np.random.default_rng(1)
    vals = rng.uniform(0.0, 1.0, size=(6, 6))
    model = cluster_map(vals, 1, rng)
    assert abs(model.centroids[0] - vals.mean()) < 1e-12


def test_cluster_map_rejects_bad_k():
    rng = np.random.default_rng(2)
    with pytest.raises(ValueError):
        cluster_map(np.zeros((0, 3)), 2, rng)
    with pytest.raises(ValueError):
        cluster_map(np.ones((4, 4)), 0, rng)
    with pytest.raises(ValueError):
        cluster_map(np.ones((4, 4)), 2, rng)  # one distinct value


def test_classify_grid_value_bands():
    rng = np.random.default_rng(3)
    img = tiny_intensity(rng)
    model = cluster_map(img.values, 3, rng)
    grid = classify_grid(model, img, rng=rng)
    assert isinstance(grid, TraversabilityGrid)
    for label in (COAST, WATER, UNCERTAIN):
        assert np.any(grid.labels == label)
    assert np.all(grid.values[grid.labels == COAST] == COAST_VALUE)
    assert np.all(grid.values[grid.labels == WATER] == WATER_VALUE)
    unc = grid.values[grid.labels == UNCERTAIN]
    assert np.all((unc > 0.0) & (unc <= 0.03))


def test_classify_grid_rejects_bad_band():
    rng = np.random.default_rng(4)
    img = tiny_intensity(rng)
    model = cluster_map(img.values, 3, rng)
    with pytest.raises(ValueError):
        classify_grid(model, img, band=(0.5, 0.2), rng=rng)


def test_classify_single_cluster_is_all_water():
    rng = np.random.default_rng(5)
    vals = np.full((4, 4), 0.7)
    img = IntensityGrid(width=4, height=4, cell_size=2.0, values=vals)
    model = cluster_map(vals, 1, rng)
    grid = classify_grid(model, img, rng=rng)
    assert np.all(grid.labels == WATER)
    assert np.all(grid.values == WATER_VALUE)


def test_synthetic_map_range_and_water_share():
    rng = np.random.default_rng(6)
    img = synthetic_intensity_map(80, 60, 10.0, rng)
    assert img.values.shape == (60, 80)
    assert img.values.min() >= 0.0 and img.values.max() <= 1.0
    assert (img.values > 0.7).mean() > 0.4


def test_lookup_and_bounds():
    grid = water_grid(10, 8, 5.0)
    assert grid.extent == (50.0, 40.0)
    assert grid.cell_index(12.0, 37.0) == (7, 2)
    assert grid.value_at(25.0, 20.0) == WATER_VALUE
    assert grid.value_at(2.0, 2.0) == COAST_VALUE  # frame cell
    assert not grid.is_water(2.0, 2.0)
    assert grid.is_water(25.0, 20.0)
    assert not grid.is_water(-1.0, 5.0)
    with pytest.raises(ValueError):
        grid.value_at(99.0, 5.0)
    vals = grid.values_at_batch(np.array([25.0, -3.0, 999.0]),
                                np.array([20.0, 20.0, 20.0]))
    assert vals[0] == WATER_VALUE
    assert vals[1] == COAST_VALUE and vals[2] == COAST_VALUE


def test_grid_csv_round_trip(tmp_path):
    rng = np.random.default_rng(7)
    img = tiny_intensity(rng)
    model = cluster_map(img.values, 3, rng)
    grid = classify_grid(model, img, rng=rng)
    path = tmp_path / "grid.csv"
    save_grid_csv(grid, path)
    loaded = load_grid_csv(path)
    assert loaded.width == grid.width and loaded.height == grid.height
    assert loaded.cell_size == grid.cell_size
    assert np.array_equal(loaded.values, grid.values)
    assert np.array_equal(loaded.labels, grid.labels)


def test_grid_csv_rejects_malformed(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0.0,1.0\n")
    with pytest.raises(ValueError):
        load_grid_csv(path)
    path.write_text("# 3 2 10.0\n0.0,1.0\n")
    with pytest.raises(ValueError):
        load_grid_csv(path)
