"""Run configuration: register geometry, pulse physics and solver budgets.

Files are JSON objects with optional sections::

    {"geometry": {"d_min": 4.0}, "physics": {"omega_max": 15.7},
     "budgets": {"exact_s": 60}, "shots": 300, "workers": 2}

Unknown keys are rejected so typos do not silently fall back to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .embedding import HardwareGeometry
from .rydberg import PhysicsConfig


class ConfigError(ValueError):
    pass


_TOP = {"geometry", "physics", "budgets", "shots", "bootstrap", "den_epochs", "workers",
        "ideal_blockade", "suite"}


def _section(cls, data: dict, name: str):
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown {name} keys: {sorted(extra)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def _budget(x) -> float:
    if x is None or x == "inf":
        return math.inf
    x = float(x)
    if not x > 0:
        raise ConfigError("budgets must be positive")
    return x


@dataclass(frozen=True)
class RunConfig:
    geometry: HardwareGeometry = field(default_factory=HardwareGeometry)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    exact_budget: float = 60.0
    sap_budget: float = 60.0
    shots: int = 300
    bootstrap_subsample: int = 100
    bootstrap_reps: int = 20
    den_epochs: int = 5000
    workers: int = 1
    ideal_blockade: bool = False
    suite_count: int = 10
    suite_sizes: tuple = (5, 10)

    def __post_init__(self):
        if self.shots < 1 or self.bootstrap_subsample < 1 or self.bootstrap_reps < 1:
            raise ConfigError("shots and bootstrap sizes must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.den_epochs < 0:
            raise ConfigError("den_epochs must be non-negative")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        extra = set(d) - _TOP
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        kw: dict = {}
        if "geometry" in d:
            kw["geometry"] = _section(HardwareGeometry, d["geometry"], "geometry")
        if "physics" in d:
            kw["physics"] = _section(PhysicsConfig, d["physics"], "physics")
        b = dict(d.get("budgets", {}))
        extra = set(b) - {"exact_s", "sap_s"}
        if extra:
            raise ConfigError(f"unknown budgets keys: {sorted(extra)}")
        if "exact_s" in b:
            kw["exact_budget"] = _budget(b["exact_s"])
        if "sap_s" in b:
            kw["sap_budget"] = _budget(b["sap_s"])
        boot = dict(d.get("bootstrap", {}))
        extra = set(boot) - {"subsample", "reps"}
        if extra:
            raise ConfigError(f"unknown bootstrap keys: {sorted(extra)}")
        if "subsample" in boot:
            kw["bootstrap_subsample"] = int(boot["subsample"])
        if "reps" in boot:
            kw["bootstrap_reps"] = int(boot["reps"])
        suite = dict(d.get("suite", {}))
        extra = set(suite) - {"count", "n_min", "n_max"}
        if extra:
            raise ConfigError(f"unknown suite keys: {sorted(extra)}")
        if "count" in suite:
            kw["suite_count"] = int(suite["count"])
        if "n_min" in suite or "n_max" in suite:
            kw["suite_sizes"] = (int(suite.get("n_min", 5)), int(suite.get("n_max", 10)))
        for key in ("shots", "den_epochs", "workers"):
            if key in d:
                kw[key] = int(d[key])
        if "ideal_blockade" in d:
            kw["ideal_blockade"] = bool(d["ideal_blockade"])
        return cls(**kw)

    def to_dict(self) -> dict:
        def budget(x):
            return "inf" if math.isinf(x) else x
        return {
            "geometry": asdict(self.geometry),
            "physics": asdict(self.physics),
            "budgets": {"exact_s": budget(self.exact_budget), "sap_s": budget(self.sap_budget)},
            "shots": self.shots,
            "bootstrap": {"subsample": self.bootstrap_subsample, "reps": self.bootstrap_reps},
            "den_epochs": self.den_epochs,
            "workers": self.workers,
            "ideal_blockade": self.ideal_blockade,
            "suite": {"count": self.suite_count, "n_min": self.suite_sizes[0],
                      "n_max": self.suite_sizes[1]},
        }

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        return cls.from_dict(data)
