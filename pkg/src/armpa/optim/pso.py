"""Particle swarm over bounded vectors.

Velocities blend inertia, a pull towards each particle's personal best and a
pull towards the swarm best; the inertia weight slides linearly from
omega_start to omega_end across the iteration budget. Personal bests update
on strict improvement only, positions are clamped to bounds after moving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from armpa.optim.problem import EngineConfig, Problem


@dataclass
class PSOConfig(EngineConfig):
    c1: float = 1.5
    c2: float = 2.0
    omega_start: float = 1.0
    omega_end: float = 0.0
    velocity_frac: float | None = None   # optional |V| clamp as range fraction


@dataclass
class Swarm:
    X: np.ndarray
    V: np.ndarray
    costs: np.ndarray
    pbest_x: np.ndarray
    pbest_cost: np.ndarray

    @property
    def gbest_index(self) -> int:
        return int(np.argmin(self.pbest_cost))


def pso_step(swarm: Swarm, cfg: PSOConfig, problem: Problem,
             rng: np.random.Generator, iteration: int) -> tuple[Swarm, int]:
    P, d = swarm.X.shape
    frac = iteration / cfg.t_max if cfg.t_max > 0 else 0.0
    omega = cfg.omega_start + (cfg.omega_end - cfg.omega_start) * frac

    g = swarm.pbest_x[swarm.gbest_index]
    r1 = rng.random((P, d))
    r2 = rng.random((P, d))
    V = (omega * swarm.V
         + cfg.c1 * r1 * (swarm.pbest_x - swarm.X)
         + cfg.c2 * r2 * (g - swarm.X))
    if cfg.velocity_frac is not None:
        span = cfg.velocity_frac * (problem.upper - problem.lower)
        V = np.clip(V, -span, span)
    moved = swarm.X + V
    X = problem.clip(moved)
    # Clamping alone leaves outward momentum pinning particles at the
    # bounds, where tied coordinates collapse the decoded diversity;
    # reflect the momentum on the clamped components instead.
    V = np.where(X != moved, -V, V)
    costs = problem.evaluate_batch(X)

    improved = costs < swarm.pbest_cost
    pbest_x = np.where(improved[:, None], X, swarm.pbest_x)
    pbest_cost = np.where(improved, costs, swarm.pbest_cost)
    return Swarm(X=X, V=V, costs=costs, pbest_x=pbest_x,
                 pbest_cost=pbest_cost), P
