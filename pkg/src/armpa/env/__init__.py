"""Simulated ocean environment: traversability grids, vortex currents, obstacles."""

from armpa.env.grid import (
    IntensityGrid,
    ClusterModel,
    TraversabilityGrid,
    COAST,
    WATER,
    UNCERTAIN,
    cluster_map,
    classify_grid,
    synthetic_intensity_map,
    load_grid_csv,
    save_grid_csv,
)
from armpa.env.currents import (
    Vortex,
    CurrentLayer,
    CurrentField,
    CurrentNoise,
    make_current_field,
    current_at,
    current_at_batch,
    evolve_current,
)
from armpa.env.obstacles import (
    Obstacle,
    ObstacleSpec,
    spawn_obstacles,
    evolve_obstacles,
    collision_boundary,
    Z_CONFIDENCE_98,
)
from armpa.env.snapshot import EnvSnapshot, evolve_env

__all__ = [
    "IntensityGrid",
    "ClusterModel",
    "TraversabilityGrid",
    "COAST",
    "WATER",
    "UNCERTAIN",
    "cluster_map",
    "classify_grid",
    "synthetic_intensity_map",
    "load_grid_csv",
    "save_grid_csv",
    "Vortex",
    "CurrentLayer",
    "CurrentField",
    "CurrentNoise",
    "make_current_field",
    "current_at",
    "current_at_batch",
    "evolve_current",
    "Obstacle",
    "ObstacleSpec",
    "spawn_obstacles",
    "evolve_obstacles",
    "collision_boundary",
    "Z_CONFIDENCE_98",
    "EnvSnapshot",
    "evolve_env",
]
