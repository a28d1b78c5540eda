"""Environment snapshots: one grid + current field + obstacle set at a step.

A snapshot is immutable by convention; `evolve_env` advances currents and
obstacles by one step (one quantum of simulated time) and returns a new
snapshot. JSON export round-trips exactly (floats serialised at full repr
precision).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field

import numpy as np

from armpa.env.grid import TraversabilityGrid, UNCERTAIN, COAST, WATER
from armpa.env.currents import (
    CurrentField, CurrentLayer, CurrentNoise, Vortex, evolve_current,
)
from armpa.env.obstacles import Obstacle, evolve_obstacles

DEFAULT_QUANTUM = 60.0   # seconds of simulated time per evolution step


@dataclass
class EnvSnapshot:
    grid: TraversabilityGrid
    field: CurrentField
    obstacles: list[Obstacle]
    step: int = 0
    time_s: float = 0.0
    quantum: float = DEFAULT_QUANTUM
    noise: CurrentNoise = dc_field(default_factory=CurrentNoise)


def evolve_env(snap: EnvSnapshot, rng: np.random.Generator) -> EnvSnapshot:
    """Advance currents and obstacles one quantum; the grid is static."""
    return EnvSnapshot(
        grid=snap.grid,
        field=evolve_current(snap.field, rng, snap.noise),
        obstacles=evolve_obstacles(snap.obstacles, snap.field, rng),
        step=snap.step + 1,
        time_s=snap.time_s + snap.quantum,
        quantum=snap.quantum,
        noise=snap.noise,
    )


def snapshot_to_dict(snap: EnvSnapshot) -> dict:
    return {
        "step": snap.step,
        "time_s": snap.time_s,
        "quantum": snap.quantum,
        "noise": {
            "sigma_center": snap.noise.sigma_center,
            "sigma_radius": snap.noise.sigma_radius,
            "sigma_strength": snap.noise.sigma_strength,
            "update_rate": snap.noise.update_rate,
        },
        "grid": {
            "width": snap.grid.width,
            "height": snap.grid.height,
            "cell_size": snap.grid.cell_size,
            "values": snap.grid.values.ravel().tolist(),
        },
        "field": {
            "extent": list(snap.field.extent),
            "layers": [
                {
                    "depth": la.depth,
                    "vortices": [
                        {"x": v.x, "y": v.y, "strength": v.strength,
                         "radius": v.radius, "gamma": v.gamma}
                        for v in la.vortices
                    ],
                }
                for la in snap.field.layers
            ],
        },
        "obstacles": [
            {
                "kind": ob.kind,
                "center": ob.center.tolist(),
                "radius": ob.radius,
                "radius_nominal": ob.radius_nominal,
                "radius_sigma": ob.radius_sigma,
                "noise_sigma": ob.noise_sigma,
                "age": ob.age,
            }
            for ob in snap.obstacles
        ],
    }


def snapshot_from_dict(d: dict) -> EnvSnapshot:
    g = d["grid"]
    values = np.array(g["values"], dtype=float).reshape(g["height"], g["width"])
    labels = np.full(values.shape, UNCERTAIN, dtype=np.int8)
    labels[values == 0.0] = COAST
    labels[values == 1.0] = WATER
    grid = TraversabilityGrid(width=g["width"], height=g["height"],
                              cell_size=g["cell_size"], values=values,
                              labels=labels)
    f = d["field"]
    layers = [
        CurrentLayer(depth=la["depth"], vortices=[Vortex(**v) for v in la["vortices"]])
        for la in f["layers"]
    ]
    field = CurrentField(extent=tuple(f["extent"]), layers=layers)
    obstacles = [
        Obstacle(kind=o["kind"], center=np.array(o["center"]), radius=o["radius"],
                 radius_nominal=o["radius_nominal"], radius_sigma=o["radius_sigma"],
                 noise_sigma=o["noise_sigma"], age=o["age"])
        for o in d["obstacles"]
    ]
    n = d["noise"]
    return EnvSnapshot(grid=grid, field=field, obstacles=obstacles,
                       step=d["step"], time_s=d["time_s"], quantum=d["quantum"],
                       noise=CurrentNoise(**n))


def save_snapshot_json(snap: EnvSnapshot, path) -> None:
    with open(path, "w") as fh:
        json.dump(snapshot_to_dict(snap), fh, sort_keys=True, indent=1)


def load_snapshot_json(path) -> EnvSnapshot:
    with open(path) as fh:
        return snapshot_from_dict(json.load(fh))
