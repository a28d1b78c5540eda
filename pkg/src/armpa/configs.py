"""Default engine configurations for the two planning layers.

The mission layer searches priority vectors over the waypoint graph; the
motion layer searches spline control points for a single leg. The motion
layer uses a larger population and hotter coefficients because its
landscape is continuous and multimodal, while the routing landscape is
piecewise constant under the decode.
"""

from __future__ import annotations

from armpa.optim import DEConfig, PSOConfig, BBOConfig, EngineConfig

MISSION_POP = 70
MOTION_POP = 120
T_MAX = 100


def mission_engine_config(engine: str, **overrides) -> EngineConfig:
    """Engine defaults for the task-routing layer."""
    engine = engine.lower()
    base = dict(pop_size=MISSION_POP, t_max=T_MAX)
    if engine == "de":
        cfg = DEConfig(**base, f_low=0.2, f_high=0.8, cross_rate=0.2)
    elif engine == "pso":
        # The clamp stops early-iteration velocity blowup from pinning the
        # swarm at the priority bounds, which starves the plateau landscape
        # of fresh orderings.
        cfg = PSOConfig(**base, c1=1.5, c2=2.0, omega_start=1.0,
                        omega_end=0.0, velocity_frac=0.4)
    elif engine == "bbo":
        cfg = BBOConfig(**base, m_max=0.5, e_rate=0.2, i_rate=0.8)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    for key, val in overrides.items():
        setattr(cfg, key, val)
    return cfg


def motion_engine_config(engine: str, **overrides) -> EngineConfig:
    """Engine defaults for the spline motion layer."""
    engine = engine.lower()
    base = dict(pop_size=MOTION_POP, t_max=T_MAX)
    if engine == "de":
        cfg = DEConfig(**base, f_low=0.2, f_high=0.8, cross_rate=0.4)
    elif engine == "pso":
        cfg = PSOConfig(**base, c1=1.8, c2=2.5, omega_start=1.5,
                        omega_end=0.5)
    elif engine == "bbo":
        cfg = BBOConfig(**base, m_max=0.1, e_rate=1.0, i_rate=1.0)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    for key, val in overrides.items():
        setattr(cfg, key, val)
    return cfg
