"""Run configuration: line-oriented key = value files with sections.

A RunConfig pins every knob of an analysis run -- function, anchor,
neighborhood scales, grid resolutions, seed, output directory -- so that
identical configs produce byte-identical reports (modulo a timestamp).
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import ConfigError

#### field parsing ####


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from None


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}") from None


def _parse_vector(section: str, key: str, raw: str) -> tuple:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    if not parts:
        raise ConfigError(f"{section}.{key}: expected at least one number")
    return tuple(_parse_float(section, key, p) for p in parts)


def _parse_scalar(raw: str):
    """Best-effort typed parse for function parameters."""
    low = raw.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw.strip()


#### the config itself ####


@dataclass
class RunConfig:
    function: str = "paper_example"
    params: dict = field(default_factory=dict)
    anchor_x: tuple = (0.0,)
    anchor_v: tuple = (0.0,)
    lam: Optional[float] = None  # None selects the prox-regularity default
    epsilon: float = 0.5
    delta: float = 0.5
    seed: int = 0
    out: str = "runs/out"
    suite: str = ""
    # grid resolutions and schedules
    bundle_variant: str = "revised"
    bundle_rho0: float = 0.25
    bundle_levels: int = 9
    bundle_per_shell: int = 32
    svar_radius: float = 0.35
    svar_pts_per_axis: int = 81
    tilt_v_radius: float = 0.25
    tilt_directions: int = 64
    tilt_radius_levels: int = 7
    d2_directions: int = 32
    epi_levels: int = 5
    epi_pts_per_axis: int = 21

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not self.function:
            raise ConfigError("function.name: must be nonempty")
        if len(self.anchor_x) != len(self.anchor_v):
            raise ConfigError("anchor.v: length must match anchor.x")
        if self.lam is not None and self.lam <= 0:
            raise ConfigError("run.lambda: must be positive")
        if self.epsilon <= 0:
            raise ConfigError("run.epsilon: must be positive")
        if self.delta <= 0:
            raise ConfigError("run.delta: must be positive")
        if self.bundle_variant not in ("revised", "original"):
            raise ConfigError(
                f"grids.bundle_variant: must be revised or original, got {self.bundle_variant!r}"
            )
        for key in ("bundle_rho0", "svar_radius", "tilt_v_radius"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"grids.{key}: must be positive")
        for key in (
            "bundle_levels",
            "bundle_per_shell",
            "svar_pts_per_axis",
            "tilt_directions",
            "tilt_radius_levels",
            "d2_directions",
            "epi_levels",
            "epi_pts_per_axis",
        ):
            if getattr(self, key) < 2:
                raise ConfigError(f"grids.{key}: must be at least 2")

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.anchor_x, dtype=np.float64)

    @property
    def v(self) -> np.ndarray:
        return np.asarray(self.anchor_v, dtype=np.float64)

    def to_dict(self) -> dict:
        d = {}
        for f_ in fields(self):
            val = getattr(self, f_.name)
            if isinstance(val, tuple):
                val = list(val)
            d[f_.name] = val
        return d


_GRID_KEYS = {
    "bundle_variant": str,
    "bundle_rho0": float,
    "bundle_levels": int,
    "bundle_per_shell": int,
    "svar_radius": float,
    "svar_pts_per_axis": int,
    "tilt_v_radius": float,
    "tilt_directions": int,
    "tilt_radius_levels": int,
    "d2_directions": int,
    "epi_levels": int,
    "epi_pts_per_axis": int,
}


def load_config(path: str) -> RunConfig:
    """Parse a sectioned key = value file into a RunConfig.

    Sections: [function] (name plus free-form parameters), [anchor]
    (x, v as comma- or space-separated vectors), [run] (lambda, epsilon,
    delta, seed, out, suite), [grids] (resolutions and schedules).
    Unknown keys are rejected with their field path.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    cfg = RunConfig()
    for section in cp.sections():
        if section == "function":
            for key, raw in cp.items(section):
                if key == "name":
                    cfg.function = raw.strip()
                else:
                    cfg.params[key] = _parse_scalar(raw)
        elif section == "anchor":
            for key, raw in cp.items(section):
                if key == "x":
                    cfg.anchor_x = _parse_vector(section, key, raw)
                elif key == "v":
                    cfg.anchor_v = _parse_vector(section, key, raw)
                else:
                    raise ConfigError(f"anchor.{key}: unknown key")
        elif section == "run":
            for key, raw in cp.items(section):
                if key == "lambda":
                    cfg.lam = None if raw.strip() == "auto" else _parse_float(section, key, raw)
                elif key == "epsilon":
                    cfg.epsilon = _parse_float(section, key, raw)
                elif key == "delta":
                    cfg.delta = _parse_float(section, key, raw)
                elif key == "seed":
                    cfg.seed = _parse_int(section, key, raw)
                elif key == "out":
                    cfg.out = raw.strip()
                elif key == "suite":
                    cfg.suite = raw.strip()
                else:
                    raise ConfigError(f"run.{key}: unknown key")
        elif section == "grids":
            for key, raw in cp.items(section):
                if key not in _GRID_KEYS:
                    raise ConfigError(f"grids.{key}: unknown key")
                kind = _GRID_KEYS[key]
                if kind is float:
                    setattr(cfg, key, _parse_float(section, key, raw))
                elif kind is int:
                    setattr(cfg, key, _parse_int(section, key, raw))
                else:
                    setattr(cfg, key, raw.strip())
        else:
            raise ConfigError(f"{section}: unknown section")
    cfg.validate()
    return cfg


def dump_config(cfg: RunConfig) -> str:
    """Serialize back to the sectioned text format (stable key order)."""
    lines = ["[function]", f"name = {cfg.function}"]
    for key in sorted(cfg.params):
        lines.append(f"{key} = {cfg.params[key]}")
    lines.append("")
    lines.append("[anchor]")
    lines.append("x = " + ", ".join(format(v, ".17g") for v in cfg.anchor_x))
    lines.append("v = " + ", ".join(format(v, ".17g") for v in cfg.anchor_v))
    lines.append("")
    lines.append("[run]")
    lines.append("lambda = " + ("auto" if cfg.lam is None else format(cfg.lam, ".17g")))
    lines.append(f"epsilon = {format(cfg.epsilon, '.17g')}")
    lines.append(f"delta = {format(cfg.delta, '.17g')}")
    lines.append(f"seed = {cfg.seed}")
    lines.append(f"out = {cfg.out}")
    lines.append(f"suite = {cfg.suite}")
    lines.append("")
    lines.append("[grids]")
    for key, kind in _GRID_KEYS.items():
        val = getattr(cfg, key)
        lines.append(f"{key} = {format(val, '.17g') if kind is float else val}")
    return "\n".join(lines) + "\n"
