"""Experiment configuration: schema, defaults, canonical hashing."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import ConfigError

__all__ = ["ExperimentConfig", "canonical_json", "config_hash", "EXPERIMENT_NAMES"]

EXPERIMENT_NAMES = (
    "calibrate",
    "mauceri-check",
    "kernel-decay",
    "weighted-norm",
    "sharp-maximal",
    "commutator-bmo",
    "rbound",
    "lemma24",
    "prop42",
    "counterexample-16",
    "scaling-21",
    "vectorfields-23",
    "lemma41",
    "pipeline",
    "theorem19",
    "theorem110",
)

_DEFAULTS: dict[str, Any] = {
    "context": {"n": 1, "N": 64, "L_xi": 13.5, "points": 216},
    "grid": {"L_z": 8.0, "m_pts": 64},
    "tgrid": {"L_t": math.pi, "t_pts": 64},
    "multiplier": {"family": "heat"},
    "panel": {"seed": 1234, "count": 5, "band": 6},
    "p_values": [2.0],
    "weight": {"kind": "power", "a": -1.0},
    "params": {},
    "output_dir": "runs",
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    data: dict = field(repr=False)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        name = raw.get("experiment")
        if name not in EXPERIMENT_NAMES:
            raise ConfigError(
                f"unknown experiment {name!r}; valid names: {', '.join(EXPERIMENT_NAMES)}"
            )
        unknown = set(raw) - set(_DEFAULTS) - {"experiment"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = _merge(_DEFAULTS, {k: v for k, v in raw.items() if k != "experiment"})
        cfg = cls(name, data)
        cfg.validate_schema()
        return cfg

    def validate_schema(self) -> None:
        c = self.data["context"]
        for key, typ in (("n", int), ("N", int), ("points", int)):
            if not isinstance(c.get(key), typ):
                raise ConfigError(f"context.{key} must be {typ.__name__}")
        if not isinstance(c.get("L_xi"), (int, float)):
            raise ConfigError("context.L_xi must be numeric")
        g = self.data["grid"]
        if not isinstance(g.get("m_pts"), int) or not isinstance(g.get("L_z"), (int, float)):
            raise ConfigError("grid must carry integer m_pts and numeric L_z")
        t = self.data["tgrid"]
        if not isinstance(t.get("t_pts"), int) or not isinstance(t.get("L_t"), (int, float)):
            raise ConfigError("tgrid must carry integer t_pts and numeric L_t")
        p = self.data["panel"]
        for key in ("seed", "count", "band"):
            if not isinstance(p.get(key), int):
                raise ConfigError(f"panel.{key} must be an integer")
        if not isinstance(self.data["p_values"], list) or not all(
            isinstance(v, (int, float)) for v in self.data["p_values"]
        ):
            raise ConfigError("p_values must be a list of numbers")
        if not isinstance(self.data["multiplier"], dict):
            raise ConfigError("multiplier must be an object")
        if not isinstance(self.data["params"], dict):
            raise ConfigError("params must be an object")

    @property
    def full(self) -> dict:
        return dict(self.data, experiment=self.experiment)

    @property
    def hash(self) -> str:
        return config_hash(self.full)

    def __getitem__(self, key: str) -> Any:
        return self.data[key]
