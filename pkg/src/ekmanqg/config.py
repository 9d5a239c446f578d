"""Experiment configuration: one JSON object with flat per-module sections."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .pressure import ConfigError, PressureLaw


def _pow2(n):
    return isinstance(n, int) and n >= 2 and not n & (n - 1)


@dataclass
class ExperimentConfig:
    law: dict = field(default_factory=lambda: {"gamma": 2.0, "a": 1.0})
    profile: dict = field(default_factory=lambda: {"rho0": 2.0, "N3": 128})
    grid: dict = field(default_factory=lambda: {"N_h": 64, "L_h": 6.283185307179586})
    viscosity: dict = field(default_factory=lambda: {"mu": 1.0, "eps_visc": 0.1, "lam": 0.1})
    eps: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    dt: float = 1e-3
    t_end: float = 1.0
    seed: int = 0
    out: str = "out"
    study: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            PressureLaw.from_dict(self.law)
            rho0, n3 = float(self.profile["rho0"]), self.profile["N3"]
            n_h, l_h = self.grid["N_h"], float(self.grid["L_h"])
            visc = [float(self.viscosity[k]) for k in ("mu", "eps_visc", "lam")]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        if not (rho0 > 0 and l_h > 0 and all(v > 0 for v in visc)):
            raise ConfigError("densities, lengths and viscosities must be positive")
        if not (_pow2(n3) and _pow2(n_h)):
            raise ConfigError("N3 and N_h must be powers of two")
        if not (self.eps and all(float(e) > 0 for e in self.eps)):
            raise ConfigError("eps list must be non-empty and positive")
        if not (self.dt > 0 and self.t_end >= 0):
            raise ConfigError("dt must be positive and t_end non-negative")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer")

    @property
    def pressure_law(self):
        return PressureLaw.from_dict(self.law)

    @classmethod
    def from_dict(cls, d):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        base = cls()
        merged = asdict(base)
        for k, v in d.items():
            merged[k] = {**merged[k], **v} if isinstance(merged[k], dict) else v
        return cls(**merged)

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def to_dict(self):
        return asdict(self)
