"""Problem wrapper, optimisation traces and the shared engine driver."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


@dataclass
class Problem:
    """A bounded continuous search space with a cost on decoded solutions.

    `decode` maps a raw vector to a domain solution (identity when None);
    `cost` scores a decoded solution (may return +inf for invalid ones).
    `batch_cost`, when provided, evaluates a whole (P, dimension) array in
    one call and must agree with cost(decode(x)) row by row.
    """

    dimension: int
    lower: np.ndarray
    upper: np.ndarray
    cost: Callable[[Any], float]
    decode: Callable[[np.ndarray], Any] | None = None
    batch_cost: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        self.lower = np.broadcast_to(np.asarray(self.lower, dtype=float),
                                     (self.dimension,)).copy()
        self.upper = np.broadcast_to(np.asarray(self.upper, dtype=float),
                                     (self.dimension,)).copy()
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    def clip(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    def evaluate(self, x: np.ndarray) -> float:
        decoded = self.decode(x) if self.decode is not None else x
        return float(self.cost(decoded))

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        if self.batch_cost is not None:
            return np.asarray(self.batch_cost(X), dtype=float)
        return np.array([self.evaluate(x) for x in X], dtype=float)


@dataclass
class EngineConfig:
    """Fields shared by every engine."""

    pop_size: int = 70
    t_max: int = 100
    stall_iters: int = 30
    stall_rel: float = 1e-6


@dataclass
class OptTrace:
    """Per-iteration running best; row 0 is the initial population."""

    iteration: list[int] = field(default_factory=list)
    best_cost: list[float] = field(default_factory=list)
    evals: list[int] = field(default_factory=list)
    elapsed_ms: list[float] = field(default_factory=list)

    def append(self, it: int, best: float, evals: int, ms: float) -> None:
        self.iteration.append(it)
        self.best_cost.append(float(best))
        self.evals.append(int(evals))
        self.elapsed_ms.append(float(ms))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,best_cost,evals,elapsed_ms\n")
            for row in zip(self.iteration, self.best_cost, self.evals,
                           self.elapsed_ms):
                fh.write(f"{row[0]},{row[1]!r},{row[2]},{row[3]!r}\n")


@dataclass
class OptResult:
    best_x: np.ndarray
    best_cost: float
    trace: OptTrace
    iterations: int
    evals: int


def init_population(problem: Problem, pop_size: int, rng: np.random.Generator,
                    warm_start: np.ndarray | None = None) -> np.ndarray:
    """Uniform random population; warm-start rows (clipped) fill the front."""
    X = rng.uniform(problem.lower, problem.upper,
                    size=(pop_size, problem.dimension))
    if warm_start is not None:
        W = np.atleast_2d(np.asarray(warm_start, dtype=float))
        k = min(len(W), pop_size)
        X[:k] = problem.clip(W[:k])
    return X


def optimize(problem: Problem, cfg: EngineConfig, rng: np.random.Generator,
             warm_start: np.ndarray | None = None,
             clock: Callable[[], float] | None = None) -> OptResult:
    """Run the engine selected by the config type.

    Stops after t_max iterations or once the running best has not improved
    by more than stall_rel (relative) for stall_iters consecutive iterations.
    t_max = 0 scores the initial population only.
    """
    from armpa.optim.de import DEConfig, Population, de_step
    from armpa.optim.pso import PSOConfig, Swarm, pso_step
    from armpa.optim.bbo import BBOConfig, Habitats, bbo_step, init_species_prob

    if clock is None:
        clock = time.perf_counter
    t0 = clock()

    X = init_population(problem, cfg.pop_size, rng, warm_start)
    costs = problem.evaluate_batch(X)
    evals = cfg.pop_size

    ibest = int(np.argmin(costs))
    best_x = X[ibest].copy()
    best_cost = float(costs[ibest])

    trace = OptTrace()
    trace.append(0, best_cost, evals, (clock() - t0) * 1000.0)

    if isinstance(cfg, DEConfig):
        state = Population(X=X, costs=costs)
        step = lambda s, t: de_step(s, cfg, problem, rng)
    elif isinstance(cfg, PSOConfig):
        # Random initial velocities keep early exploration alive on cost
        # plateaus, where pulls toward the bests alone collapse the swarm.
        vfrac = cfg.velocity_frac if cfg.velocity_frac is not None else 0.5
        vspan = vfrac * (problem.upper - problem.lower)
        V0 = rng.uniform(-vspan, vspan, size=X.shape)
        state = Swarm(X=X, V=V0, costs=costs,
                      pbest_x=X.copy(), pbest_cost=costs.copy())
        step = lambda s, t: pso_step(s, cfg, problem, rng, t)
    elif isinstance(cfg, BBOConfig):
        state = Habitats(X=X, costs=costs,
                         species_prob=init_species_prob(cfg.pop_size))
        step = lambda s, t: bbo_step(s, cfg, problem, rng)
    else:
        raise ValueError(f"unrecognised engine config {type(cfg).__name__}")

    stall = 0
    iterations = 0
    for t in range(1, cfg.t_max + 1):
        state, n_evals = step(state, t - 1)
        evals += n_evals
        iterations = t

        ibest = int(np.argmin(state.costs))
        cand = float(state.costs[ibest])
        if cand < best_cost:
            gain = best_cost - cand
            significant = (not np.isfinite(best_cost)) or \
                gain > cfg.stall_rel * max(abs(best_cost), 1e-12)
            best_cost = cand
            best_x = state.X[ibest].copy()
            stall = 0 if significant else stall + 1
        else:
            stall += 1
        trace.append(t, best_cost, evals, (clock() - t0) * 1000.0)
        if stall >= cfg.stall_iters:
            break

    return OptResult(best_x=best_x, best_cost=best_cost, trace=trace,
                     iterations=iterations, evals=evals)
