"""Uncertain obstacles: fixed installations and buoyant drifters.

Both kinds carry a nominal radius plus a radius uncertainty; motion planning
inflates the radius to a confidence boundary that also grows linearly with
the time elapsed since the obstacle was observed. Static obstacles keep their
centre and only re-draw the uncertain radius each step; buoyant obstacles
additionally drift with the local current (random coupling magnitude) plus
white position noise.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from armpa.env.currents import CurrentField, current_at_batch

STATIC = "static_uncertain"
BUOYANT = "buoyant"

# Two-sided 98% confidence quantile of the standard normal.
Z_CONFIDENCE_98 = 2.326

# Linear growth rate of the confidence boundary per elapsed step.
DEFAULT_GROWTH = 0.01


@dataclass
class Obstacle:
    kind: str                 # STATIC or BUOYANT
    center: np.ndarray        # (3,) metres
    radius: float             # current radius estimate, > 0
    radius_nominal: float     # mean of the radius distribution
    radius_sigma: float       # uncertainty (std dev) of the radius
    noise_sigma: float        # position noise std dev (buoyant drift)
    age: int = 0              # evolution steps since observation

    def __post_init__(self) -> None:
        self.center = np.asarray(self.center, dtype=float)
        if self.kind not in (STATIC, BUOYANT):
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        if self.radius <= 0:
            raise ValueError("obstacle radius must be positive")


@dataclass
class ObstacleSpec:
    """Spawn parameters for a batch of obstacles."""

    count: int = 4
    buoyant_fraction: float = 0.5
    radius_nominal: float = 30.0
    radius_sigma_max: float = 3.0     # radius uncertainty ~ U(0, this)
    noise_sigma: float = 1.0          # buoyant position noise std dev
    coupling_sigma: float = 0.3       # current coupling ~ |N(0, this)|


def spawn_obstacles(spec: ObstacleSpec, a, b,
                    rng: np.random.Generator) -> list[Obstacle]:
    """Place obstacles in the axis-aligned box spanned by points a and b.

    Each centre is uniform in the box shrunk by that obstacle's radius, so
    the whole body starts inside the box. Raises ValueError when the box is
    too small to hold an obstacle.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    out: list[Obstacle] = []
    for i in range(spec.count):
        sigma_r = float(rng.uniform(0.0, spec.radius_sigma_max))
        radius = float(rng.normal(spec.radius_nominal, sigma_r))
        radius = max(radius, 0.1)
        if np.any(hi - lo < 2.0 * radius):
            raise ValueError(
                f"box {lo} .. {hi} too small for obstacle radius {radius:.1f}"
            )
        center = rng.uniform(lo + radius, hi - radius)
        kind = BUOYANT if rng.uniform() < spec.buoyant_fraction else STATIC
        out.append(Obstacle(
            kind=kind, center=center, radius=radius,
            radius_nominal=spec.radius_nominal, radius_sigma=sigma_r,
            noise_sigma=spec.noise_sigma,
        ))
    return out


def evolve_obstacles(obstacles: list[Obstacle], field: CurrentField | None,
                     rng: np.random.Generator,
                     coupling_sigma: float = 0.3) -> list[Obstacle]:
    """One step: returns new obstacles, inputs untouched.

    Static: radius re-drawn around its nominal with its own sigma.
    Buoyant: same radius update, centre drifts by coupling * local current
    plus position noise. Zero current and zero noise leave centres unchanged.
    """
    out: list[Obstacle] = []
    for ob in obstacles:
        radius = float(rng.normal(ob.radius_nominal, ob.radius_sigma))
        radius = max(radius, 0.1)
        center = ob.center
        if ob.kind == BUOYANT:
            coupling = abs(float(rng.normal(0.0, coupling_sigma)))
            drift = np.zeros(3)
            if field is not None:
                drift = coupling * _clipped_current(field, ob.center)
            noise = rng.normal(0.0, ob.noise_sigma, size=3) if ob.noise_sigma > 0 \
                else np.zeros(3)
            center = ob.center + drift + noise
        out.append(replace(ob, center=center, radius=radius, age=ob.age + 1))
    return out


def _clipped_current(field: CurrentField, center: np.ndarray) -> np.ndarray:
    """Current at the obstacle centre, clipping the query into the domain so a
    drifter that wandered out keeps a defined (boundary) velocity."""
    ex, ey = field.extent
    zmin, zmax = field.depth_range
    q = np.array([
        min(max(center[0], 0.0), ex),
        min(max(center[1], 0.0), ey),
        min(max(center[2], zmin), zmax),
    ])
    return current_at_batch(field, q)


def collision_boundary(ob: Obstacle, elapsed: float = 0.0,
                       growth: float = DEFAULT_GROWTH) -> float:
    """Radius the motion planner must clear: nominal radius inflated by the
    98% confidence margin, growing linearly with elapsed steps."""
    if elapsed < 0:
        raise ValueError("elapsed must be >= 0")
    return ob.radius + Z_CONFIDENCE_98 * ob.radius_sigma * (1.0 + growth * elapsed)
