"""Conversion of a partially filled garage into a block configuration.

Four phases, each moving every vehicle in a single direction: pack right,
pack up, push surplus vehicles down their columns so that no row holds more
than the block pattern admits, and finally pack left into blocks of width
``W = ceil(1 / (1 - lambda))`` separated by empty columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

import networkx as nx

from ..layout import Cell, GarageLayout
from ..plan import Plan, plan_from_steps

Step = Dict[int, Cell]

RIGHT, UP, DOWN, LEFT = (0, 1), (-1, 0), (1, 0), (0, -1)


class BlockError(ValueError):
    pass


@dataclass
class PhaseRecord:
    name: str
    direction: Tuple[int, int]
    steps: List[Step] = field(default_factory=list)


@dataclass
class BlockResult:
    plan: Plan
    phases: List[PhaseRecord]
    width: int

    @property
    def makespan(self) -> int:
        return sum(len(p.steps) for p in self.phases)


def block_width(lam: float) -> int:
    if not 0 < lam < 1:
        raise BlockError(f"fill fraction must lie in (0, 1), got {lam}")
    return math.ceil(1 / (1 - lam) - 1e-9)


def slot_columns(layout: GarageLayout, width: int) -> List[int]:
    """Parking columns used by blocks; every ``width + 1``-th column stays empty."""
    return [c for c in range(1, layout.m2 - 1) if (c - 1) % (width + 1) != width]


def is_block_configuration(layout: GarageLayout, positions: Mapping[int, Cell], width: int) -> bool:
    slots = slot_columns(layout, width)
    rows: Dict[int, List[int]] = {}
    for c in positions.values():
        rows.setdefault(c.row, []).append(c.col)
    return all(sorted(cols) == slots[: len(cols)] for cols in rows.values())


def _monotone(pos: Dict[int, Cell], target: Mapping[int, Cell], d: Tuple[int, int]) -> List[Step]:
    """Move every vehicle straight along ``d`` to its target, all in parallel.

    A vehicle advances when the next cell is free or its occupant advances
    in the same step; vehicles nearer the destination side decide first.
    """
    steps: List[Step] = []
    at = {c: v for v, c in pos.items()}
    while True:
        todo = [v for v in pos if pos[v] != target[v]]
        if not todo:
            return steps
        todo.sort(key=lambda v: -(pos[v][0] * d[0] + pos[v][1] * d[1]))
        step: Step = {}
        for v in todo:
            nxt = Cell(pos[v][0] + d[0], pos[v][1] + d[1])
            occ = at.get(nxt)
            if occ is None or occ in step:
                step[v] = nxt
        if not step:
            raise BlockError("monotone phase stalled")
        for v in step:
            del at[pos[v]]
        for v, c in step.items():
            at[c] = v
            pos[v] = c
        steps.append(step)


def _pack(pos: Mapping[int, Cell], layout: GarageLayout, d: Tuple[int, int]) -> Dict[int, Cell]:
    """Targets that pack every line toward ``d`` without reordering."""
    R, W = layout.m1 - 2, layout.m2 - 2
    target: Dict[int, Cell] = {}
    lines: Dict[int, List[int]] = {}
    horizontal = d[0] == 0
    for v, c in pos.items():
        lines.setdefault(c.row if horizontal else c.col, []).append(v)
    for k, vs in lines.items():
        if horizontal:
            vs.sort(key=lambda v: pos[v].col, reverse=d[1] > 0)
            for j, v in enumerate(vs):
                target[v] = Cell(k, W - j if d[1] > 0 else 1 + j)
        else:
            vs.sort(key=lambda v: pos[v].row, reverse=d[0] > 0)
            for j, v in enumerate(vs):
                target[v] = Cell(R - j if d[0] > 0 else 1 + j, k)
    return target


def _rebalance_rows(pos: Mapping[int, Cell], layout: GarageLayout, slots: List[int]) -> Dict[int, Cell]:
    """Choose final rows per column so every row prefix fits the slot pattern.

    Solved as a max flow: columns supply their vehicles, each cell carries
    at most one, and per row a chain of prefix nodes caps how many vehicles
    may sit left of every column.
    """
    R, W = layout.m1 - 2, layout.m2 - 2
    prefix = [0] * (W + 1)
    for c in range(1, W + 1):
        prefix[c] = prefix[c - 1] + (1 if c in slots else 0)
    height: Dict[int, int] = {}
    for c in pos.values():
        height[c.col] = height.get(c.col, 0) + 1
    g = nx.DiGraph()
    for c, h in sorted(height.items()):
        g.add_edge("src", ("col", c), capacity=h)
        for r in range(1, R + 1):
            g.add_edge(("col", c), ("cell", r, c), capacity=1)
            g.add_edge(("cell", r, c), ("pre", r, c), capacity=1)
    for r in range(1, R + 1):
        for c in range(1, W):
            g.add_edge(("pre", r, c), ("pre", r, c + 1), capacity=prefix[c])
        g.add_edge(("pre", r, W), "sink", capacity=prefix[W])
    value, flow = nx.maximum_flow(g, "src", "sink")
    if value != len(pos):
        raise BlockError(f"only {value} of {len(pos)} vehicles fit the block pattern")
    target: Dict[int, Cell] = {}
    for c in sorted(height):
        rows = sorted(r for r in range(1, R + 1) if flow[("col", c)].get(("cell", r, c), 0) > 0)
        vs = sorted((v for v in pos if pos[v].col == c), key=lambda v: pos[v].row)
        for v, r in zip(vs, rows):
            target[v] = Cell(r, c)
    return target


def _left_into_slots(pos: Mapping[int, Cell], slots: List[int]) -> Dict[int, Cell]:
    target: Dict[int, Cell] = {}
    rows: Dict[int, List[int]] = {}
    for v, c in pos.items():
        rows.setdefault(c.row, []).append(v)
    for r, vs in rows.items():
        vs.sort(key=lambda v: pos[v].col)
        for j, v in enumerate(vs):
            target[v] = Cell(r, slots[j])
    return target


def block_conversion(layout: GarageLayout, positions: Mapping[int, Cell], lam: float) -> BlockResult:
    """Plan the four monotone phases from ``positions`` to a block configuration."""
    width = block_width(lam)
    slots = slot_columns(layout, width)
    for v, c in positions.items():
        if not layout.is_parking(c):
            raise BlockError(f"vehicle {v} at {c} is not on a parking spot")
    if len(positions) > len(slots) * (layout.m1 - 2):
        raise BlockError("too many vehicles for the block pattern")
    start = dict(positions)
    if is_block_configuration(layout, start, width):
        return BlockResult(Plan({v: [c] for v, c in start.items()}), [], width)
    pos = dict(start)
    phases = []
    for name, d, make in (
        ("right", RIGHT, lambda p: _pack(p, layout, RIGHT)),
        ("up", UP, lambda p: _pack(p, layout, UP)),
        ("down", DOWN, lambda p: _rebalance_rows(p, layout, slots)),
        ("left", LEFT, lambda p: _left_into_slots(p, slots)),
    ):
        target = make(pos)
        phases.append(PhaseRecord(name, d, _monotone(pos, target, d)))
    steps = [s for ph in phases for s in ph.steps]
    return BlockResult(plan_from_steps(start, steps), phases, width)


def monotone_violations(start: Mapping[int, Cell], result: BlockResult) -> int:
    """Count moves that go against (or across) their phase's direction."""
    pos = dict(start)
    bad = 0
    for ph in result.phases:
        for step in ph.steps:
            for v, c in step.items():
                d = (c[0] - pos[v][0], c[1] - pos[v][1])
                if d != ph.direction:
                    bad += 1
                pos[v] = c
    return bad
