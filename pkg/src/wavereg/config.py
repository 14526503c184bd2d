"""Experiment configuration: sectioned key-value text, keys unique across sections.

Example::

    [manifold]
    manifold = circle

    [filter]
    a = 1.0
    b = 2.0

    [eps]
    eps_start = 0.0625
    eps_ratio = 0.5
    eps_count = 9

Any key may be overridden from the command line as ``--key value``
(underscores may be written as dashes).
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .asymptotics import geometric_grid
from .errors import ConfigError, WaveregError
from .manifold import ManifoldModel
from .zoo import ZOO_IDS

SECTIONS = {
    "manifold": ("manifold", "side_lengths"),
    "filter": ("a", "b"),
    "cutoff": ("c", "c_alt"),
    "eps": ("eps_start", "eps_ratio", "eps_count"),
    "zoo": ("zoo",),
    "checks": ("checks", "contrasts", "seminorms"),
    "weyl": ("lambda_max", "weyl_tol"),
    "wavefront": ("window_radius",),
    "tolerance": ("residual_tol",),
    "output": ("output_dir",),
    "run": ("seed", "workers"),
}
DEFAULT_OUTPUT = "wavereg-out"


@dataclass(frozen=True)
class ExperimentConfig:
    manifold: str = "circle"
    side_lengths: tuple = (2 * math.pi, 2 * math.pi)
    a: float = 1.0
    b: float = 2.0
    c: float = 0.5
    c_alt: float = 1.0
    eps_start: float = 2.0**-4
    eps_ratio: float = 0.5
    eps_count: int = 9
    zoo: tuple | None = None
    checks: tuple = ("A", "B", "C", "D", "E")
    contrasts: bool = False
    seminorms: tuple = ("L2", "sup", "sup_d1", "sup_d2")
    lambda_max: float | None = None
    weyl_tol: float | None = None
    window_radius: float = 0.5
    residual_tol: float = 1e-12
    output_dir: str | None = None
    seed: int = 42
    workers: int = 1

    # -- derived ------------------------------------------------------------
    def manifold_model(self) -> ManifoldModel:
        if self.manifold == "circle":
            return ManifoldModel.circle(8)
        return ManifoldModel.torus(self.side_lengths, 8)

    def eps_grid(self) -> np.ndarray:
        return geometric_grid(self.eps_start, self.eps_ratio, self.eps_count)

    def refined_grid(self, ratio: float) -> np.ndarray:
        """Same eps range as :meth:`eps_grid`, finer ratio (used by tail-slope checks)."""
        g = self.eps_grid()
        count = int(math.floor(math.log(g[-1] / g[0]) / math.log(ratio) + 1e-9)) + 1
        return geometric_grid(self.eps_start, ratio, max(count, 2))

    def zoo_members(self) -> tuple:
        if self.zoo is not None:
            return self.zoo
        if self.manifold == "circle":
            return ("dirac", "sawtooth_jump", "smooth_bump")
        return ("line_delta", "smooth_bump")

    def resolved_lambda_max(self) -> float:
        if self.lambda_max is not None:
            return self.lambda_max
        return 1e6 if self.manifold == "circle" else 1e4

    def resolved_weyl_tol(self) -> float:
        if self.weyl_tol is not None:
            return self.weyl_tol
        return 0.01 if self.manifold == "circle" else 0.02

    def resolved_output_dir(self) -> Path:
        return Path(self.output_dir or os.environ.get("REG_OUTPUT_DIR") or DEFAULT_OUTPUT)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_SEQ = {"side_lengths": float, "zoo": str, "checks": str, "seminorms": str}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_value(key: str, text: str, updates: dict):
    text = text.strip()
    default = _FIELDS[key].default
    try:
        if key in _SEQ:
            items = [t.strip() for t in text.split(",") if t.strip()]
            return tuple(_SEQ[key](t) for t in items)
        if key == "c":
            parts = [float(t) for t in text.split(",") if t.strip()]
            if len(parts) == 2:
                updates["c_alt"] = parts[1]
            elif len(parts) != 1:
                raise ConfigError("c takes one value or a pair")
            return parts[0]
        if key in ("output_dir", "manifold"):
            return text
        if key == "contrasts":
            return _parse_bool(text)
        if key in ("eps_count", "seed", "workers"):
            val = float(text)
            if val != int(val):
                raise ConfigError(f"{key} must be an integer")
            return int(val)
        if default is None or isinstance(default, float):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r}") from exc
    raise ConfigError(f"unsupported key {key}")


def normalize_key(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_").lower()
    if key not in _FIELDS:
        raise ConfigError(f"unknown configuration key {key!r}")
    return key


def parse_text(text: str) -> dict:
    """Key-value updates from config text (sections optional, keys unique)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text if text.lstrip().startswith("[") else "[top]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    updates: dict = {}
    for section in cp.sections():
        if section != "top" and section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for raw, val in cp.items(section):
            key = normalize_key(raw)
            if section != "top" and key not in SECTIONS[section]:
                raise ConfigError(f"key {key!r} does not belong to section [{section}]")
            if key in updates:
                raise ConfigError(f"duplicate key {key!r}")
            updates[key] = _parse_value(key, val, updates)
    return updates


def parse_overrides(pairs) -> dict:
    """``[("--key", "value"), ...]`` into typed updates."""
    updates: dict = {}
    for raw, val in pairs:
        key = normalize_key(raw)
        updates[key] = _parse_value(key, val, updates)
    return updates


def load_config(path=None, overrides=None) -> ExperimentConfig:
    updates = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} not found")
        updates.update(parse_text(p.read_text(encoding="utf-8")))
    updates.update(overrides or {})
    cfg = replace(ExperimentConfig(), **updates)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    if cfg.manifold not in ("circle", "torus"):
        raise ConfigError(f"manifold must be circle or torus, got {cfg.manifold!r}")
    positive = ["a", "b", "c", "c_alt", "eps_start", "eps_ratio", "eps_count", "window_radius",
                "residual_tol", "workers"]
    for key in positive:
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"{key} must be positive")
    for key in ("lambda_max", "weyl_tol"):
        v = getattr(cfg, key)
        if v is not None and not v > 0:
            raise ConfigError(f"{key} must be positive")
    if any(not L > 0 for L in cfg.side_lengths):
        raise ConfigError("side lengths must be positive")
    if cfg.manifold == "torus" and len(cfg.side_lengths) not in (2, 3):
        raise ConfigError("torus needs 2 or 3 side lengths")
    if not cfg.a < cfg.b:
        raise ConfigError("filter needs a < b")
    if cfg.eps_start > 1:
        raise ConfigError("eps grid must lie within (0, 1]")
    if not cfg.eps_ratio < 1:
        raise ConfigError("eps ratio must be below 1")
    try:
        cfg.eps_grid()
    except WaveregError as exc:
        raise ConfigError(f"invalid eps grid: {exc}") from exc
    bad = [z for z in cfg.zoo_members() if z not in ZOO_IDS]
    if bad:
        raise ConfigError(f"unknown zoo members {bad}")
    bad = [c for c in cfg.checks if c not in ("A", "B", "C", "D", "E")]
    if bad:
        raise ConfigError(f"unknown checks {bad}")
    if cfg.seed < 0:
        raise ConfigError("seed must be non-negative")


def write_template(path) -> Path:
    """Write the default configuration as a commented file."""
    cfg = ExperimentConfig()
    lines = []
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for k in keys:
            v = getattr(cfg, k)
            if v is None:
                lines.append(f"# {k} =")
            elif isinstance(v, tuple):
                lines.append(f"{k} = {', '.join(str(x) for x in v)}")
            else:
                lines.append(f"{k} = {v}")
        lines.append("")
    p = Path(path)
    p.write_text("\n".join(lines), encoding="utf-8")
    return p
