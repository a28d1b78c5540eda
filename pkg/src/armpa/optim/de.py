"""Differential evolution with a blended donor base.

The donor is a random convex combination of three distinct population
members; the mutant adds a scaled difference of the first two on top of it.
Binomial crossover mixes mutant and parent genes (the forced index k
guarantees at least one mutant gene), and greedy selection keeps whichever
of parent and trial costs less, so survivors never get worse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from armpa.optim.problem import EngineConfig, Problem


@dataclass
class DEConfig(EngineConfig):
    f_low: float = 0.2
    f_high: float = 0.8
    cross_rate: float = 0.2


@dataclass
class Population:
    X: np.ndarray
    costs: np.ndarray


def distinct_triples(pop_size: int, rng: np.random.Generator):
    """Per row i, three distinct indices r1, r2, r3, all != i, uniform.

    Sampled by drawing into a shrunken range and shifting past the excluded
    values in ascending order, which keeps the draw count fixed (vectorised,
    no rejection loop).
    """
    if pop_size < 4:
        raise ValueError("differential evolution needs a population of >= 4")
    i = np.arange(pop_size)
    r1 = rng.integers(0, pop_size - 1, pop_size)
    r1 = r1 + (r1 >= i)
    lo = np.minimum(i, r1)
    hi = np.maximum(i, r1)
    r2 = rng.integers(0, pop_size - 2, pop_size)
    r2 = r2 + (r2 >= lo)
    r2 = r2 + (r2 >= hi)
    a = np.sort(np.stack([i, r1, r2]), axis=0)
    r3 = rng.integers(0, pop_size - 3, pop_size)
    r3 = r3 + (r3 >= a[0])
    r3 = r3 + (r3 >= a[1])
    r3 = r3 + (r3 >= a[2])
    return r1, r2, r3


def de_trials(X: np.ndarray, cfg: DEConfig, problem: Problem,
              rng: np.random.Generator) -> np.ndarray:
    """Build the trial population (mutation + crossover), clipped to bounds."""
    P, d = X.shape
    r1, r2, r3 = distinct_triples(P, rng)
    lam = rng.uniform(0.0, 1.0, size=(P, 3))
    lam /= lam.sum(axis=1, keepdims=True)
    donor = (lam[:, 0:1] * X[r1] + lam[:, 1:2] * X[r2] + lam[:, 2:3] * X[r3])
    F = rng.uniform(cfg.f_low, cfg.f_high, size=(P, 1))
    mutant = donor + F * (X[r1] - X[r2])

    k = rng.integers(0, d, size=P)
    take = rng.random((P, d)) <= cfg.cross_rate
    take[np.arange(P), k] = True
    trial = np.where(take, mutant, X)
    return problem.clip(trial)


def de_step(pop: Population, cfg: DEConfig, problem: Problem,
            rng: np.random.Generator) -> tuple[Population, int]:
    trial = de_trials(pop.X, cfg, problem, rng)
    t_costs = problem.evaluate_batch(trial)
    accept = t_costs <= pop.costs
    X = np.where(accept[:, None], trial, pop.X)
    costs = np.where(accept, t_costs, pop.costs)
    return Population(X=X, costs=costs), len(trial)
