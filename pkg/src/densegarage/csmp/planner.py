"""CONCAT and CSMP planners for batched parking/retrieval."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..instance import BVPRInstance
from ..layout import manhattan
from ..plan import Plan, plan_from_steps
from .mcp import run_mcp
from .primitives import Step, single_mp_park, single_mp_retrieve
from .state import Occupancy

PLANNERS = ("concat", "rcsmp", "pcsmp")


@dataclass(frozen=True)
class PriorityPolicy:
    """``random`` orders tasks by a seeded shuffle; ``prioritized`` uses :func:`prioritize`."""

    kind: str = "prioritized"
    seed: int = 0

    def order(self, instance: BVPRInstance) -> List[int]:
        if self.kind == "prioritized":
            return prioritize(instance)
        if self.kind == "random":
            tasks = instance.tasked
            random.Random(self.seed).shuffle(tasks)
            return tasks
        raise ValueError(f"unknown priority policy {self.kind!r}")


def prioritize(instance: BVPRInstance) -> List[int]:
    """Parking first, then retrievals nearest to their port first; ties by id.

    A delivered vehicle sits on its port and obstructs row 0 for anyone who
    still has to pass it, so a retrieval is postponed while another pending
    retrieval's row-0 span covers its port. If every pending retrieval is
    covered, the nearest one goes next.
    """
    parks = sorted(p.vehicle for p in instance.park)
    pending = sorted(
        instance.retrieve, key=lambda r: (manhattan(r.start, r.goal), r.vehicle)
    )

    def covered(r) -> bool:
        return any(
            o is not r and min(o.start.col, o.goal.col) <= r.goal.col <= max(o.start.col, o.goal.col)
            for o in pending
        )

    order: List[int] = []
    while pending:
        pick = next((r for r in pending if not covered(r)), pending[0])
        order.append(pick.vehicle)
        pending.remove(pick)
    return parks + order


def sequential_steps(instance: BVPRInstance, order: Sequence[int]) -> Tuple[List[Step], Dict[int, int]]:
    """Run the single-vehicle primitives one task after another.

    Returns the concatenated timesteps and, per task vehicle, the index of the
    step after which its primitive finished.
    """
    layout = instance.layout
    if sorted(order) != instance.tasked:
        raise ValueError("order must list every park and retrieve vehicle exactly once")
    occ = Occupancy(instance.starts)
    ports = {p.vehicle: p.port for p in instance.park}
    goals = instance.retrieval_goals
    steps: List[Step] = []
    ends: Dict[int, int] = {}
    for v in order:
        if v in ports:
            prim = single_mp_park(occ, layout, v, ports[v])
        else:
            prim = single_mp_retrieve(occ, layout, v, goals[v])
        for st in prim.steps:
            occ.apply(st)
            steps.append(st)
        ends[v] = len(steps)
    return steps, ends


def concat_plan(instance: BVPRInstance, order: Sequence[int]) -> Plan:
    """Single-vehicle plans strictly end to end."""
    steps, _ = sequential_steps(instance, order)
    return plan_from_steps(instance.starts, steps)


def makespan_bound(instance: BVPRInstance) -> int:
    lay = instance.layout
    return instance.n_r * (lay.m1 + lay.m2) + 2 * instance.n_p


def csmp(instance: BVPRInstance, policy: PriorityPolicy = PriorityPolicy()) -> Plan:
    """Sequential primitives executed concurrently under their vertex visit orders."""
    order = policy.order(instance)
    steps, _ = sequential_steps(instance, order)
    executed = run_mcp(instance.starts, steps, limit=max(len(steps), 1))
    return plan_from_steps(instance.starts, executed)


def solve(instance: BVPRInstance, planner: str, seed: int = 0) -> Plan:
    if planner == "concat":
        return concat_plan(instance, PriorityPolicy("random", seed).order(instance))
    if planner == "rcsmp":
        return csmp(instance, PriorityPolicy("random", seed))
    if planner == "pcsmp":
        return csmp(instance, PriorityPolicy("prioritized"))
    raise ValueError(f"unknown planner {planner!r}; choose from {PLANNERS}")
