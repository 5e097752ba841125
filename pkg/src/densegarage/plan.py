"""Timed multi-vehicle plans."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, NamedTuple, Sequence

from .layout import Cell


class Move(NamedTuple):
    vehicle: int
    t: int
    src: Cell
    dst: Cell

    @property
    def is_wait(self) -> bool:
        return self.src == self.dst

    @property
    def direction(self) -> tuple:
        return (self.dst[0] - self.src[0], self.dst[1] - self.src[1])


class PlanError(ValueError):
    pass


@dataclass
class Plan:
    """Per-vehicle paths indexed by timestep ``0..horizon``, padded with waits."""

    paths: Dict[int, List[Cell]] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        if not self.paths:
            return 0
        return max(len(p) for p in self.paths.values()) - 1

    def __post_init__(self) -> None:
        self.paths = {int(v): [Cell(*c) for c in p] for v, p in self.paths.items()}
        self.pad()

    def pad(self, horizon: int | None = None) -> "Plan":
        T = self.horizon if horizon is None else horizon
        for v, p in self.paths.items():
            if not p:
                raise PlanError(f"vehicle {v} has an empty path")
            if len(p) - 1 > T:
                raise PlanError(f"vehicle {v} path longer than horizon {T}")
            p.extend([p[-1]] * (T + 1 - len(p)))
        return self

    def position(self, vehicle: int, t: int) -> Cell:
        p = self.paths[vehicle]
        return p[t] if t < len(p) else p[-1]

    def final(self) -> Dict[int, Cell]:
        return {v: p[-1] for v, p in self.paths.items()}

    def moves(self) -> Iterator[Move]:
        for v in sorted(self.paths):
            p = self.paths[v]
            for t in range(len(p) - 1):
                yield Move(v, t, p[t], p[t + 1])

    def move_count(self) -> int:
        return sum(1 for m in self.moves() if not m.is_wait)

    def trimmed(self) -> "Plan":
        """Drop trailing timesteps in which nobody moves."""
        T = self.horizon
        while T > 0 and all(p[T] == p[T - 1] for p in self.paths.values()):
            T -= 1
        return Plan({v: list(p[: T + 1]) for v, p in self.paths.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Plan):
            return NotImplemented
        return self.paths == other.paths


def plan_from_steps(start: Mapping[int, Cell], steps: Sequence[Mapping[int, Cell]]) -> Plan:
    """Build a plan from a start map and a list of per-timestep position updates.

    Each element of ``steps`` maps the vehicles that move at that timestep to
    their new cell; everyone else waits.
    """
    pos = dict(start)
    paths: Dict[int, List[Cell]] = {v: [Cell(*c)] for v, c in pos.items()}
    for step in steps:
        pos.update(step)
        for v, p in paths.items():
            p.append(Cell(*pos[v]))
    return Plan(paths)
