"""Biogeography-based optimisation.

Habitats are ranked by cost; the best habitat hosts the most species. The
immigration rate lambda falls and the emigration rate mu rises with species
count: lambda_S = I_r * (1 - S / S_max), mu_S = E_r * S / S_max, so the best
habitat has lambda = 0 and mu = E_r. Migration replaces single solution
variables of immigrating habitats with the value from an emigrating habitat
chosen by roulette over mu. Mutation rates derive from rank-indexed species
probabilities (one-step update per iteration); elite habitats pass through
unchanged and the population is never discarded wholesale, only modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from armpa.optim.problem import EngineConfig, Problem


@dataclass
class BBOConfig(EngineConfig):
    m_max: float = 0.5
    e_rate: float = 0.2     # E_r, emigration scale
    i_rate: float = 0.8     # I_r, immigration scale
    elite: int = 2


@dataclass
class Habitats:
    X: np.ndarray
    costs: np.ndarray
    species_prob: np.ndarray    # rank-indexed, position 0 = best habitat


def bbo_rates(pop_size: int, cfg: BBOConfig) -> tuple[np.ndarray, np.ndarray]:
    """(lambda, mu) per rank position, 0 = best habitat (S = S_max)."""
    s = pop_size - np.arange(pop_size)          # species count, best = S_max
    s_max = pop_size
    frac = s / s_max
    lam = cfg.i_rate * (1.0 - frac)
    mu = cfg.e_rate * frac
    return lam, mu


def init_species_prob(pop_size: int) -> np.ndarray:
    return np.full(pop_size, 1.0 / pop_size)


def update_species_prob(prob: np.ndarray, lam: np.ndarray, mu: np.ndarray
                        ) -> np.ndarray:
    """One-step species-count probability update over the rank index.

    Position p holds S = S_max - p species; its neighbours in species space
    are positions p+1 (one fewer) and p-1 (one more). Boundary terms drop.
    """
    hold = prob * (1.0 - lam - mu)
    gain_from_fewer = np.zeros_like(prob)
    gain_from_fewer[:-1] = prob[1:] * lam[1:]
    gain_from_more = np.zeros_like(prob)
    gain_from_more[1:] = prob[:-1] * mu[:-1]
    out = np.clip(hold + gain_from_fewer + gain_from_more, 1e-12, None)
    return out / out.sum()


def mutation_rates(prob: np.ndarray, m_max: float) -> np.ndarray:
    """m(S) = m_max * (1 - P_S) / P_max, clipped to [0, 1]."""
    p_max = float(prob.max())
    return np.clip(m_max * (1.0 - prob) / p_max, 0.0, 1.0)


def bbo_step(hab: Habitats, cfg: BBOConfig, problem: Problem,
             rng: np.random.Generator) -> tuple[Habitats, int]:
    P, d = hab.X.shape
    order = np.argsort(hab.costs, kind="stable")
    X = hab.X[order].copy()
    costs = hab.costs[order]

    lam, mu = bbo_rates(P, cfg)
    prob = update_species_prob(hab.species_prob, lam, mu)
    m_rates = mutation_rates(prob, cfg.m_max)

    elite = min(cfg.elite, P)

    # Migration: per variable, immigrate with rate lambda_i, donor by
    # roulette over mu.
    immigrate = rng.random((P, d)) < lam[:, None]
    immigrate[:elite] = False
    mu_total = mu.sum()
    migrated = X.copy()
    if mu_total > 0 and immigrate.any():
        cdf = np.cumsum(mu) / mu_total
        donors = np.searchsorted(cdf, rng.random((P, d)), side="right")
        donors = np.minimum(donors, P - 1)
        cols = np.broadcast_to(np.arange(d), (P, d))
        migrated = np.where(immigrate, X[donors, cols], X)

    # Mutation: resample mutated variables uniformly inside the bounds.
    mutate = rng.random((P, d)) < m_rates[:, None]
    mutate[:elite] = False
    fresh = rng.uniform(problem.lower, problem.upper, size=(P, d))
    X_new = problem.clip(np.where(mutate, fresh, migrated))

    changed = np.any(X_new != X, axis=1)
    costs_new = costs.copy()
    if changed.any():
        costs_new[changed] = problem.evaluate_batch(X_new[changed])
    return Habitats(X=X_new, costs=costs_new, species_prob=prob), int(changed.sum())
