"""Arrival processes and traffic scenario presets."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

from ..layout import GarageLayout, build_layout


@dataclass(frozen=True)
class ArrivalModel:
    """Independent per-port, per-timestep Bernoulli draws."""

    p_p: float
    p_r: float
    seed: int = 0

    def __post_init__(self) -> None:
        for name, p in (("p_p", self.p_p), ("p_r", self.p_r)):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    initial_fill: str
    p_p: float
    p_r: float
    horizon: int = 500

    def __post_init__(self) -> None:
        if self.initial_fill not in ("empty", "full"):
            raise ValueError(f"initial_fill must be 'empty' or 'full', got {self.initial_fill!r}")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")

    def model(self, seed: int) -> ArrivalModel:
        return ArrivalModel(self.p_p, self.p_r, seed)


PRESETS: Dict[str, ScenarioPreset] = {
    "morning": ScenarioPreset("morning", "empty", 0.6, 0.01),
    "workday": ScenarioPreset("workday", "full", 0.05, 0.05),
    "evening": ScenarioPreset("evening", "full", 0.01, 0.6),
}


@dataclass
class ScenarioConfig:
    """On-disk scenario description."""

    scenario: str
    m1: int
    m2: int
    ports: List[int]
    p_p: float
    p_r: float
    horizon: int = 500
    seed: int = 0
    initial_fill: str = "empty"

    @classmethod
    def from_preset(cls, name: str, m1: int = 12, m2: int = 12, ports: Optional[List[int]] = None,
                    seed: int = 0) -> "ScenarioConfig":
        try:
            pre = PRESETS[name]
        except KeyError:
            raise ValueError(f"unknown scenario {name!r}; choose from {sorted(PRESETS)}") from None
        cols = list(range(1, m2 - 1)) if ports is None else list(ports)
        return cls(name, m1, m2, cols, pre.p_p, pre.p_r, pre.horizon, seed, pre.initial_fill)

    @property
    def preset(self) -> ScenarioPreset:
        return ScenarioPreset(self.scenario, self.initial_fill, self.p_p, self.p_r, self.horizon)

    def layout(self) -> GarageLayout:
        return build_layout(self.m1, self.m2, self.ports)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        doc = json.loads(text)
        missing = [k for k in ("scenario", "m1", "m2", "ports", "p_p", "p_r") if k not in doc]
        if missing:
            raise ValueError(f"scenario config missing fields: {', '.join(missing)}")
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"scenario config has unknown fields: {', '.join(unknown)}")
        cfg = cls(**doc)
        ScenarioPreset(cfg.scenario, cfg.initial_fill, cfg.p_p, cfg.p_r, cfg.horizon)
        ArrivalModel(cfg.p_p, cfg.p_r, cfg.seed)
        return cfg
