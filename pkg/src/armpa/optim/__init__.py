"""Population metaheuristics over bounded continuous vectors.

All three engines share one contract: they operate on real vectors clamped
to box bounds after every update, they are deterministic given (config,
problem, seed) and their running-best trace never increases.
"""

from armpa.optim.problem import (
    Problem,
    OptTrace,
    OptResult,
    EngineConfig,
    optimize,
    init_population,
)
from armpa.optim.de import DEConfig, Population, de_step
from armpa.optim.pso import PSOConfig, Swarm, pso_step
from armpa.optim.bbo import BBOConfig, Habitats, bbo_step, bbo_rates

ENGINE_NAMES = ("de", "pso", "bbo")


def config_for(engine: str, **overrides):
    """Engine config by short name with field overrides."""
    cls = {"de": DEConfig, "pso": PSOConfig, "bbo": BBOConfig}.get(engine)
    if cls is None:
        raise ValueError(f"unknown engine {engine!r}; pick from {ENGINE_NAMES}")
    return cls(**overrides)


__all__ = [
    "Problem", "OptTrace", "OptResult", "EngineConfig", "optimize",
    "init_population", "DEConfig", "Population", "de_step",
    "PSOConfig", "Swarm", "pso_step",
    "BBOConfig", "Habitats", "bbo_step", "bbo_rates",
    "ENGINE_NAMES", "config_for",
]
