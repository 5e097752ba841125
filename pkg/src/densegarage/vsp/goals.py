"""Goal configurations derived from an anticipated retrieval order."""

from __future__ import annotations

import json
from typing import Dict, List, Mapping, Sequence

from ..layout import Cell, GarageLayout, manhattan

GoalAssignment = Dict[int, Cell]


def spot_ranking(layout: GarageLayout) -> List[Cell]:
    """Parking spots ordered by row, then distance to the nearest port, then column."""
    ports = layout.ports

    def key(c: Cell):
        return (c.row, min(abs(c.col - p.col) for p in ports), c.col)

    return sorted(layout.parking_spots, key=key)


def assign_goals(schedule: Sequence[int], layout: GarageLayout, parked: Sequence[int] | None = None) -> GoalAssignment:
    """The k-th vehicle of the schedule gets the k-th ranked spot."""
    if len(set(schedule)) != len(schedule):
        raise ValueError("schedule lists a vehicle twice")
    if parked is not None and sorted(parked) != sorted(schedule):
        raise ValueError(
            f"schedule covers {len(schedule)} vehicles but {len(parked)} are parked"
        )
    ranking = spot_ranking(layout)
    if len(schedule) > len(ranking):
        raise ValueError(f"{len(schedule)} vehicles exceed {len(ranking)} parking spots")
    return {v: ranking[k] for k, v in enumerate(schedule)}


def manhattan_lower_bound(start: Mapping[int, Cell], goal: Mapping[int, Cell]) -> int:
    if set(start) != set(goal):
        raise ValueError("start and goal configurations hold different vehicles")
    return max((manhattan(start[v], goal[v]) for v in start), default=0)


def read_schedule(text: str) -> List[int]:
    doc = json.loads(text)
    order = doc.get("order") if isinstance(doc, dict) else None
    if not isinstance(order, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in order):
        raise ValueError("schedule file must be a JSON object with an integer list 'order'")
    return order


def write_schedule(order: Sequence[int]) -> str:
    return json.dumps({"order": list(order)}) + "\n"
