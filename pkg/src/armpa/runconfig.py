"""Run configuration: a flat key = value file with sections.

One RunConfig drives every CLI entry point and the Monte Carlo harness.
The format is INI-style plain text (diff-friendly for checked-in presets);
keys map one-to-one onto RunConfig fields, sections only group them. Any
unknown section or key is an error, and emit/parse round-trips exactly:
parse(emit(cfg)) == cfg.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields

from armpa.optim import ENGINE_NAMES

MODES = ("mission", "motion", "armpa")
SCENARIOS = ("open_water", "slalom")


class ConfigError(ValueError):
    """Invalid, unknown or out-of-range configuration input."""


@dataclass
class RunConfig:
    # [run]
    seed: int = 1
    mode: str = "mission"
    runs: int = 30
    engine: str = "de"
    out_dir: str = "out"
    workers: int = 1
    charge_planning: bool = True
    # [env]
    grid_seed: int = 7
    grid_width: int = 400
    grid_height: int = 400
    cell_size: float = 10.0
    quantum: float = 60.0
    # [graph]
    n_nodes_min: int = 30
    n_nodes_max: int = 50
    n_tasks: int = 30
    target_degree: float = 6.0
    speed: float = 2.5
    # [mission]
    t_budget: float = 3.42e4
    mission_pop_size: int = 70
    mission_t_max: int = 100
    # [motion]
    scenario: str = "open_water"
    motion_pop_size: int = 120
    motion_t_max: int = 100
    n_ctrl: int = 5
    m_samples: int = 100


SECTIONS: dict[str, tuple[str, ...]] = {
    "run": ("seed", "mode", "runs", "engine", "out_dir", "workers",
            "charge_planning"),
    "env": ("grid_seed", "grid_width", "grid_height", "cell_size", "quantum"),
    "graph": ("n_nodes_min", "n_nodes_max", "n_tasks", "target_degree",
              "speed"),
    "mission": ("t_budget", "mission_pop_size", "mission_t_max"),
    "motion": ("scenario", "motion_pop_size", "motion_t_max", "n_ctrl",
               "m_samples"),
}

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    kind = _TYPES[key]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "false"):
                return low == "true"
            raise ValueError(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from None


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def validate_config(cfg: RunConfig) -> None:
    """Raise ConfigError when any field is out of range."""
    def need(ok: bool, msg: str) -> None:
        if not ok:
            raise ConfigError(msg)

    need(cfg.mode in MODES, f"mode must be one of {MODES}, got {cfg.mode!r}")
    need(cfg.engine in ENGINE_NAMES,
         f"engine must be one of {ENGINE_NAMES}, got {cfg.engine!r}")
    need(cfg.scenario in SCENARIOS,
         f"scenario must be one of {SCENARIOS}, got {cfg.scenario!r}")
    need(cfg.seed >= 0, "seed must be >= 0")
    need(cfg.runs >= 1, "runs must be >= 1")
    need(cfg.workers >= 1, "workers must be >= 1")
    need(cfg.grid_width >= 3 and cfg.grid_height >= 3,
         "grid must be at least 3 x 3 cells")
    need(cfg.cell_size > 0, "cell_size must be positive")
    need(cfg.quantum > 0, "quantum must be positive")
    need(cfg.n_nodes_min >= 2, "n_nodes_min must be >= 2")
    need(cfg.n_nodes_max >= cfg.n_nodes_min,
         "n_nodes_max must be >= n_nodes_min")
    need(cfg.n_tasks >= 0, "n_tasks must be >= 0")
    need(cfg.target_degree > 0, "target_degree must be positive")
    need(cfg.speed > 0, "speed must be positive")
    need(cfg.t_budget > 0, "t_budget must be positive")
    need(cfg.mission_pop_size >= 5, "mission_pop_size must be >= 5")
    need(cfg.motion_pop_size >= 5, "motion_pop_size must be >= 5")
    need(cfg.mission_t_max >= 0, "mission_t_max must be >= 0")
    need(cfg.motion_t_max >= 0, "motion_t_max must be >= 0")
    need(cfg.n_ctrl >= 4, "n_ctrl must be >= 4")
    need(cfg.m_samples >= 2, "m_samples must be >= 2")


def parse_config_text(text: str) -> RunConfig:
    """Parse a config from its text form; unknown sections or keys fail."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = _parse_value(key, raw)
    cfg = RunConfig(**values)
    validate_config(cfg)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def emit_config(cfg: RunConfig) -> str:
    """Render the config as canonical text (every key, section order fixed)."""
    out = io.StringIO()
    for si, (section, keys) in enumerate(SECTIONS.items()):
        if si:
            out.write("\n")
        out.write(f"[{section}]\n")
        for key in keys:
            out.write(f"{key} = {_format_value(getattr(cfg, key))}\n")
    return out.getvalue()


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_config(cfg))
