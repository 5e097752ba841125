"""Plan validation against the garage collision rules.

Three interactions are forbidden between any two vehicles ``i`` and ``j``:

* meet: both occupy the same cell at the same timestep;
* head-on: they swap cells across one edge in a single timestep;
* perpendicular following: ``i`` enters the cell ``j`` is leaving while the
  two move in perpendicular directions. Following in the same direction
  (a convoy) is allowed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

from .instance import BVPRInstance
from .layout import Cell, GarageLayout
from .plan import Plan, PlanError

KINDS = ("meet", "head-on", "perp-follow", "discontinuity", "goal-miss", "capacity")


@dataclass(frozen=True)
class Violation:
    kind: str
    t: int
    vehicles: Tuple[int, ...]


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, kind: str) -> int:
        return sum(1 for v in self.violations if v.kind == kind)

    def summary(self) -> str:
        if self.ok:
            return "ok"
        parts = [f"{k}={self.count(k)}" for k in KINDS if self.count(k)]
        return "violations: " + ", ".join(parts)


def _perpendicular(a: Tuple[int, int], b: Tuple[int, int]) -> bool:
    return a[0] * b[0] + a[1] * b[1] == 0


def step_violations(
    t: int, cur: Mapping[int, Cell], nxt: Mapping[int, Cell], layout: GarageLayout | None = None
) -> List[Violation]:
    """Violations of one transition ``t -> t+1``.

    Only vehicles present in both snapshots are considered, which lets the
    simulator check steps where vehicles appear or leave.
    """
    out: List[Violation] = []
    common = [v for v in cur if v in nxt]
    at_cur: Dict[Cell, int] = {cur[v]: v for v in common}
    at_nxt: Dict[Cell, int] = {}
    for v in common:
        a, b = cur[v], nxt[v]
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) > 1 or (
            layout is not None and not layout.in_bounds(b)
        ):
            out.append(Violation("discontinuity", t, (v,)))
        other = at_nxt.get(b)
        if other is not None:
            out.append(Violation("meet", t + 1, tuple(sorted((other, v)))))
        else:
            at_nxt[b] = v
    for i in common:
        a, b = cur[i], nxt[i]
        if a == b:
            continue
        j = at_cur.get(b)
        if j is None or j == i:
            continue
        ja, jb = cur[j], nxt[j]
        if jb == a:
            if i < j:
                out.append(Violation("head-on", t, (i, j)))
            continue
        if ja == jb:
            continue  # j stays: reported as a meet
        di = (b[0] - a[0], b[1] - a[1])
        dj = (jb[0] - ja[0], jb[1] - ja[1])
        if _perpendicular(di, dj):
            out.append(Violation("perp-follow", t, (i, j)))
    return out


def snapshot_meets(t: int, snap: Mapping[int, Cell]) -> List[Violation]:
    seen: Dict[Cell, int] = {}
    out = []
    for v in sorted(snap):
        c = snap[v]
        if c in seen:
            out.append(Violation("meet", t, (seen[c], v)))
        else:
            seen[c] = v
    return out


def validate_plan(layout: GarageLayout, instance: BVPRInstance, plan: Plan) -> ValidationReport:
    """Check ``plan`` for every collision rule, continuity, and goal attainment.

    Returns every violation found, not just the first.
    """
    starts = instance.starts
    missing = sorted(set(starts) - set(plan.paths))
    if missing:
        raise PlanError(f"plan has no path for vehicles {missing}")
    extra = sorted(set(plan.paths) - set(starts))
    if extra:
        raise PlanError(f"plan has paths for unknown vehicles {extra}")
    T = plan.horizon
    for v, p in plan.paths.items():
        if len(p) != T + 1:
            raise PlanError(f"path of vehicle {v} has length {len(p)}, expected {T + 1}")

    report = ValidationReport()
    vs = sorted(plan.paths)
    for v in vs:
        if plan.paths[v][0] != starts[v]:
            report.violations.append(Violation("discontinuity", 0, (v,)))
    report.violations.extend(snapshot_meets(0, {v: plan.paths[v][0] for v in vs}))
    for t in range(T):
        cur = {v: plan.paths[v][t] for v in vs}
        nxt = {v: plan.paths[v][t + 1] for v in vs}
        report.violations.extend(step_violations(t, cur, nxt, layout))

    goals = instance.retrieval_goals
    final = plan.final()
    on_spots = 0
    for v in vs:
        end = final[v]
        if v in goals:
            if end != goals[v]:
                report.violations.append(Violation("goal-miss", T, (v,)))
        elif not layout.is_parking(end):
            report.violations.append(Violation("goal-miss", T, (v,)))
        if layout.is_parking(end):
            on_spots += 1
    if on_spots > layout.capacity - 1:
        report.violations.append(Violation("capacity", T, tuple(vs)))
    return report
