"""Solution-quality metrics: makespan, average task time, moves per task."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

from .instance import BVPRInstance
from .plan import Plan


class MetricsUndefined(ValueError):
    pass


@dataclass(frozen=True)
class Metrics:
    mkpn: int
    aprt: float
    anm: float


def completion_time(path: List) -> int:
    """Last timestep at which the vehicle arrives in its final cell (0 if it never moves)."""
    end = path[-1]
    t = len(path) - 1
    while t > 0 and path[t - 1] == end:
        t -= 1
    return t


def completion_times(plan: Plan) -> Dict[int, int]:
    return {v: completion_time(p) for v, p in plan.paths.items()}


def compute_metrics(instance: BVPRInstance, plan: Plan) -> Metrics:
    tasks = instance.tasked
    if not tasks:
        raise MetricsUndefined("no park or retrieve tasks: aprt and anm are undefined")
    done = completion_times(plan)
    mkpn = max(done.values(), default=0)
    aprt = sum(done[v] for v in tasks) / len(tasks)
    anm = plan.move_count() / len(tasks)
    return Metrics(mkpn=mkpn, aprt=aprt, anm=anm)
