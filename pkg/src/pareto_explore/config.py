"""Flat ``key = value`` experiment configuration."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

DATA_DIR = Path(__file__).parent / "data"


class ConfigError(ValueError):
    def __init__(self, msg: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)
        self.msg = msg
        self.key = key
        self.line = line


def _floats(text: str) -> tuple[float, ...]:
    parts = [t for t in text.replace(",", " ").split() if t]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(t) for t in parts)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class ExplorationConfig:
    # world
    world: str = "maze12"
    cell_size: float = 0.1
    start_x: float = 1.0
    start_y: float = 1.0
    start_theta_deg: float = 0.0
    # mapping
    hinge_res: float = 0.2
    query_res: float = 0.1
    gamma: float = 40.0
    alpha: float = 10.0
    vi_iters: int = 3
    hull_margin: float = 0.4
    # lidar
    fov_deg: float = 360.0
    n_beams: int = 181
    max_range: float = 4.0
    free_spacing: float = 0.5
    range_noise: float = 0.0
    # primitives
    arc_length: float = 0.5
    dtheta_deg: tuple = (-60.0, -30.0, 0.0, 30.0, 60.0)
    # planner
    budget: int = 500
    c: float = 0.4
    tree_depth: int = 8
    rollout_depth: int = 5
    normalize: bool = True
    # collision
    robot_radius: float = 0.3
    occ_threshold: float = 0.4
    # termination
    max_steps: int = 300
    entropy_fraction: float = 0.1
    dynamics_epsilon: float = 0.01
    dynamics_patience: int = 10
    # run
    seed: int = 0
    snapshot_every: int = 0

    def validate(self) -> "ExplorationConfig":
        positive = (
            "cell_size", "hinge_res", "query_res", "gamma", "alpha",
            "fov_deg", "max_range", "free_spacing", "arc_length", "robot_radius",
        )
        for name in positive:
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"must be positive, got {v}", name)
        if self.hull_margin < 0:
            raise ConfigError("must be >= 0", "hull_margin")
        for name, lo in (("vi_iters", 1), ("n_beams", 2), ("budget", 1), ("tree_depth", 1),
                         ("rollout_depth", 1), ("max_steps", 1), ("dynamics_patience", 1)):
            if getattr(self, name) < lo:
                raise ConfigError(f"must be >= {lo}", name)
        if self.fov_deg > 360:
            raise ConfigError("must be <= 360", "fov_deg")
        if self.range_noise < 0:
            raise ConfigError("must be >= 0", "range_noise")
        if self.c < 0:
            raise ConfigError("must be >= 0", "c")
        if not 0 < self.occ_threshold < 1:
            raise ConfigError("must lie in (0, 1)", "occ_threshold")
        if not 0 < self.entropy_fraction <= 1:
            raise ConfigError("must lie in (0, 1]", "entropy_fraction")
        if self.dynamics_epsilon < 0:
            raise ConfigError("must be >= 0", "dynamics_epsilon")
        if self.snapshot_every < 0:
            raise ConfigError("must be >= 0", "snapshot_every")
        if not self.dtheta_deg:
            raise ConfigError("needs at least one heading change", "dtheta_deg")
        return self

    def world_path(self, base: Path | None = None) -> Path:
        """Resolve ``world``: an existing path (relative to ``base``) or a bundled map name."""
        p = Path(self.world)
        if base is not None and not p.is_absolute() and (base / p).exists():
            return base / p
        if p.exists():
            return p
        for cand in (DATA_DIR / self.world, DATA_DIR / f"{self.world}.txt"):
            if cand.exists():
                return cand
        raise ConfigError(f"world file not found: {self.world}", "world")

    def replace(self, **kw) -> "ExplorationConfig":
        return dataclasses.replace(self, **kw).validate()


_FIELDS = {f.name: f for f in fields(ExplorationConfig)}


def _convert(name: str, text: str):
    default = _FIELDS[name].default
    if name == "world":
        return text
    if isinstance(default, bool):
        return _bool(text)
    if isinstance(default, int):
        v = float(text)
        if v != int(v):
            raise ValueError(f"not an integer: {text!r}")
        return int(v)
    if isinstance(default, float):
        return float(text)
    if isinstance(default, tuple):
        return _floats(text)
    raise TypeError(name)


def parse_config_text(text: str) -> ExplorationConfig:
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", key, lineno)
        if key in values:
            raise ConfigError("duplicate key", key, lineno)
        try:
            values[key] = _convert(key, val)
        except ValueError as exc:
            raise ConfigError(f"bad value: {exc}", key, lineno) from None
        lines[key] = lineno
    cfg = ExplorationConfig(**values)
    try:
        cfg.validate()
    except ConfigError as exc:
        if exc.key in lines:
            raise ConfigError(exc.msg, exc.key, lines[exc.key]) from None
        raise
    return cfg


def parse_config(path) -> ExplorationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)


def format_config(cfg: ExplorationConfig) -> str:
    out = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        elif isinstance(v, bool):
            v = "true" if v else "false"
        out.append(f"{f.name} = {v}")
    return "\n".join(out) + "\n"
