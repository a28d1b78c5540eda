"""Dynamic ocean currents as layered sums of Lamb vortices.

Each depth layer holds a handful of vortices. A vortex induces a tangential
velocity around its centre using the regularised Lamb profile

    v_theta(r) = (strength / (2 pi r)) * (1 - exp(-r^2 / radius^2))

which is zero at the core (the r -> 0 limit is exact, no singularity) and
falls off like 1/r far away. The vertical component is a Gaussian bump of the
horizontal distance, peaking at strength * gamma / (2 pi radius) over the
core. Layers evolve independently between queries: centres, core radii and
strengths each take one noise step scaled by the field's update rate.

Snapshots are immutable by convention: `evolve_current` returns a new field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

DEFAULT_LAYER_SPACING = 10.0   # m between stacked layers
DEFAULT_DEPTH_MAX = 100.0


@dataclass
class Vortex:
    x: float
    y: float
    strength: float   # circulation-like magnitude (m^2/s)
    radius: float     # core length scale (m), > 0
    gamma: float      # vertical coupling coefficient

    def __post_init__(self) -> None:
        if self.radius <= 0:
            raise ValueError("vortex radius must be positive")


@dataclass
class CurrentLayer:
    depth: float
    vortices: list[Vortex]


@dataclass
class CurrentField:
    """Stack of vortex layers over a rectangular horizontal domain."""

    extent: tuple[float, float]     # (x_max, y_max), domain [0, x_max) x [0, y_max)
    layers: list[CurrentLayer]      # sorted by depth ascending

    def __post_init__(self) -> None:
        self.layers = sorted(self.layers, key=lambda la: la.depth)

    @property
    def depth_range(self) -> tuple[float, float]:
        return (self.layers[0].depth, self.layers[-1].depth)


@dataclass
class CurrentNoise:
    """Evolution noise; sigmas feed zero-mean normal draws scaled by the
    update rate."""

    sigma_center: float = 0.4
    sigma_radius: float = 0.3
    sigma_strength: float = 0.2
    update_rate: float = 4.0


def _layer_arrays(layer: CurrentLayer):
    vs = layer.vortices
    cx = np.array([v.x for v in vs])
    cy = np.array([v.y for v in vs])
    st = np.array([v.strength for v in vs])
    rad = np.array([v.radius for v in vs])
    gam = np.array([v.gamma for v in vs])
    return cx, cy, st, rad, gam


def _layer_velocity(layer: CurrentLayer, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Velocity (u, v, w) of one layer at points (x, y); shapes (K,) -> (K, 3)."""
    cx, cy, st, rad, gam = _layer_arrays(layer)
    dx = x[:, None] - cx[None, :]
    dy = y[:, None] - cy[None, :]
    r2 = dx * dx + dy * dy
    r = np.sqrt(r2)
    # v_theta / r, finite at the core: limit is strength / (2 pi radius^2).
    with np.errstate(divide="ignore", invalid="ignore"):
        vt_over_r = st / (2.0 * np.pi * r2) * (1.0 - np.exp(-r2 / rad**2))
    core = r < 1e-12
    if core.any():
        vt_over_r = np.where(core, st / (2.0 * np.pi * rad**2), vt_over_r)
    u = (-dy * vt_over_r).sum(axis=1)
    v = (dx * vt_over_r).sum(axis=1)
    # Vertical bump: gamma * strength * Gaussian(r; 0, diag(radius)).
    w = (gam * st * np.exp(-r2 / (2.0 * rad)) / (2.0 * np.pi * rad)).sum(axis=1)
    return np.stack([u, v, w], axis=1)


def current_at_batch(field: CurrentField, positions: np.ndarray) -> np.ndarray:
    """Current velocity (u, v, w) at each (x, y, z) row of `positions`.

    Horizontal position must lie inside the field extent and z inside the
    layer depth range; linear interpolation between the two bracketing layers.
    """
    p = np.asarray(positions, dtype=float)
    squeeze = p.ndim == 1
    if squeeze:
        p = p[None, :]
    x, y, z = p[:, 0], p[:, 1], p[:, 2]
    ex, ey = field.extent
    zmin, zmax = field.depth_range
    bad = (x < 0) | (x > ex) | (y < 0) | (y > ey) | (z < zmin - 1e-9) | (z > zmax + 1e-9)
    if bad.any():
        i = int(np.argmax(bad))
        raise ValueError(
            f"position ({x[i]}, {y[i]}, {z[i]}) outside current-field domain "
            f"extent={field.extent} depths=[{zmin}, {zmax}]"
        )

    depths = np.array([la.depth for la in field.layers])
    if len(field.layers) == 1:
        out = _layer_velocity(field.layers[0], x, y)
        return out[0] if squeeze else out

    hi = np.clip(np.searchsorted(depths, z, side="right"), 1, len(depths) - 1)
    lo = hi - 1
    frac = np.clip((z - depths[lo]) / (depths[hi] - depths[lo]), 0.0, 1.0)
    # Evaluate each distinct bracketing layer once over all points.
    uniq = np.unique(np.concatenate([lo, hi]))
    stack = np.stack([_layer_velocity(field.layers[int(i)], x, y)
                      for i in uniq])
    rows = np.arange(p.shape[0])
    v_lo = stack[np.searchsorted(uniq, lo), rows]
    v_hi = stack[np.searchsorted(uniq, hi), rows]
    out = v_lo + frac[:, None] * (v_hi - v_lo)
    return out[0] if squeeze else out


def current_at(field: CurrentField, position) -> np.ndarray:
    """Current velocity (u, v, w) at one (x, y, z) position."""
    return current_at_batch(field, np.asarray(position, dtype=float))


def make_current_field(extent: tuple[float, float],
                       rng: np.random.Generator,
                       n_layers: int = 11,
                       depth_max: float = DEFAULT_DEPTH_MAX,
                       vortices_range: tuple[int, int] = (5, 8),
                       strength_range: tuple[float, float] = (200.0, 700.0),
                       radius_range: tuple[float, float] = (150.0, 400.0),
                       gamma: float = 0.05,
                       noise: CurrentNoise | None = None) -> CurrentField:
    """Build a layered field: the surface layer is random, each deeper layer
    is the one above with one extra noise application."""
    if noise is None:
        noise = CurrentNoise()
    ex, ey = extent
    n_vort = int(rng.integers(vortices_range[0], vortices_range[1] + 1))
    surface = [
        Vortex(
            x=float(rng.uniform(0, ex)),
            y=float(rng.uniform(0, ey)),
            strength=float(rng.uniform(*strength_range) * rng.choice([-1.0, 1.0])),
            radius=float(rng.uniform(*radius_range)),
            gamma=gamma,
        )
        for _ in range(n_vort)
    ]
    depths = np.linspace(0.0, depth_max, n_layers)
    layers = [CurrentLayer(depth=float(depths[0]), vortices=surface)]
    for d in depths[1:]:
        prev = layers[-1].vortices
        layers.append(CurrentLayer(depth=float(d),
                                   vortices=_noised(prev, noise, rng)))
    return CurrentField(extent=extent, layers=layers)


def _noised(vortices: list[Vortex], noise: CurrentNoise,
            rng: np.random.Generator) -> list[Vortex]:
    rate = noise.update_rate
    out = []
    for v in vortices:
        nx, ny = rng.normal(0.0, noise.sigma_center, size=2)
        nr = rng.normal(0.0, noise.sigma_radius)
        ns = rng.normal(0.0, noise.sigma_strength)
        out.append(Vortex(
            x=v.x + rate * nx,
            y=v.y + rate * ny,
            strength=v.strength + rate * ns,
            radius=max(v.radius + rate * nr, 1e-6),
            gamma=v.gamma,
        ))
    return out


def evolve_current(field: CurrentField, rng: np.random.Generator,
                   noise: CurrentNoise | None = None) -> CurrentField:
    """One evolution step; returns a new field, the input is untouched."""
    if noise is None:
        noise = CurrentNoise()
    layers = [replace(la, vortices=_noised(la.vortices, noise, rng))
              for la in field.layers]
    return CurrentField(extent=field.extent, layers=layers)


def vortex_tangential_speed(strength: float, radius: float, r: float) -> float:
    """Scalar tangential speed profile, exposed for direct inspection."""
    if r < 1e-12:
        return 0.0
    return strength / (2.0 * math.pi * r) * (1.0 - math.exp(-(r * r) / (radius * radius)))
