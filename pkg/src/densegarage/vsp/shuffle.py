"""Row and column shuffles and the three-phase Rubik table reconfiguration.

A shuffle permutes the vehicles of one parking line using the two lines
next to it as passing lanes. It runs an odd-even transposition sort: in
every round the out-of-order neighbour pairs swap, one vehicle stepping
into a lane, sliding past its partner and stepping back. Even rounds use
the lane on one side and odd rounds the other, so the step back of one
round coincides with the step out of the next and a round costs two
timesteps. Empty spots take part as virtual vehicles that never move.

To give every line two empty neighbours at full density the sweep first
slides all later lines one cell toward the far corridor, then walks the
gap along the garage one line at a time, and finally slides everything
back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from ..layout import Cell, GarageLayout
from ..plan import Plan, plan_from_steps

Step = Dict[int, Cell]
Matrix = Dict[Cell, int]


class ShuffleError(ValueError):
    pass


@dataclass
class ShuffleStep:
    """One realized line shuffle (or a convoy shift when ``kind == 'shift'``)."""

    kind: str
    index: int
    permutation: List[int]
    steps: List[Step] = field(default_factory=list)
    phase: str = ""

    @property
    def makespan(self) -> int:
        return len(self.steps)

    @property
    def moves(self) -> int:
        return sum(len(s) for s in self.steps)


@dataclass
class ShuffleResult:
    plan: Plan
    records: List[ShuffleStep]
    stages: List[Matrix] = field(default_factory=list)

    @property
    def column_shuffles(self) -> int:
        return sum(1 for r in self.records if r.kind == "column")

    @property
    def row_shuffles(self) -> int:
        return sum(1 for r in self.records if r.kind == "row")

    def report_rows(self) -> List[Tuple[str, str, int, int, int]]:
        return [(r.phase, r.kind, r.index, r.makespan, r.moves) for r in self.records]


def _line_cell(kind: str, phys: int, along: int, lane: int) -> Cell:
    # along is 0-based within the parking block
    if kind == "column":
        return Cell(1 + along, phys + lane)
    return Cell(phys + lane, 1 + along)


def oets_line(elements: Sequence[int], keys: Mapping[int, int], kind: str, phys: int) -> Tuple[List[Step], List[int]]:
    """Sort one line by ``keys`` with lanes at ``phys - 1`` and ``phys + 1``.

    ``elements`` lists the line's contents in order; negative ids are
    virtual. Returns the timesteps (real vehicles only) and the final order.
    """
    arr = list(elements)
    n = len(arr)
    timeline: Dict[int, Step] = {}
    tau = 0
    last_parity: Optional[int] = None
    end = 0

    def put(t: int, v: int, along: int, lane: int) -> None:
        if v >= 0:
            timeline.setdefault(t, {})[v] = _line_cell(kind, phys, along, lane)

    for ph in range(n):
        parity = ph % 2
        swaps = [i for i in range(parity, n - 1, 2) if keys[arr[i]] > keys[arr[i + 1]]]
        if not swaps:
            continue
        if last_parity is not None:
            tau = tau + 2 if last_parity != parity else tau + 3
        last_parity = parity
        lane = -1 if parity == 0 else 1
        for i in swaps:
            up, low = arr[i], arr[i + 1]
            if up >= 0 and low >= 0:
                if parity == 0:
                    put(tau, up, i, lane)
                    put(tau + 1, up, i + 1, lane)
                    put(tau + 1, low, i, 0)
                    put(tau + 2, up, i + 1, 0)
                else:
                    put(tau, low, i + 1, lane)
                    put(tau + 1, low, i, lane)
                    put(tau + 1, up, i + 1, 0)
                    put(tau + 2, low, i, 0)
                end = max(end, tau + 3)
            elif up >= 0:
                put(tau + 1, up, i + 1, 0)
                end = max(end, tau + 2)
            elif low >= 0:
                put(tau + 1, low, i, 0)
                end = max(end, tau + 2)
            arr[i], arr[i + 1] = low, up
    steps = [timeline.get(t, {}) for t in range(end)]
    while steps and not steps[-1]:
        steps.pop()
    return steps, arr


class _Sweep:
    """Physical bookkeeping while lines slide around during a sweep."""

    def __init__(self, layout: GarageLayout, matrix: Matrix, kind: str) -> None:
        self.layout = layout
        self.kind = kind
        self.n_lines = layout.m2 - 2 if kind == "column" else layout.m1 - 2
        self.length = layout.m1 - 2 if kind == "column" else layout.m2 - 2
        # line contents by original index, along-ordered
        self.lines: Dict[int, List[int]] = {}
        for k in range(1, self.n_lines + 1):
            self.lines[k] = [
                matrix[Cell(1 + a, k) if kind == "column" else Cell(k, 1 + a)]
                for a in range(self.length)
            ]
        self.loc = {k: k for k in self.lines}

    def shift(self, moves: Mapping[int, int]) -> Step:
        step: Step = {}
        for k, delta in moves.items():
            if not delta:
                continue
            self.loc[k] += delta
            for a, v in enumerate(self.lines[k]):
                if v >= 0:
                    step[v] = _line_cell(self.kind, self.loc[k], a, 0)
        return step

    def matrix(self) -> Matrix:
        out: Matrix = {}
        for k, line in self.lines.items():
            for a, v in enumerate(line):
                out[_line_cell(self.kind, k, a, 0)] = v
        return out


def sweep(
    layout: GarageLayout,
    matrix: Matrix,
    kind: str,
    keys: Mapping[int, int],
    phase: str = "",
) -> Tuple[List[Step], List[ShuffleStep], Matrix]:
    """Shuffle every line of ``kind`` so each line is sorted by ``keys``."""
    sw = _Sweep(layout, matrix, kind)
    todo = [
        k for k, line in sw.lines.items()
        if any(keys[line[a]] > keys[line[a + 1]] for a in range(len(line) - 1))
    ]
    if not todo:
        return [], [], sw.matrix()
    steps: List[Step] = []
    records: List[ShuffleStep] = []
    L = sw.n_lines

    def record_shift(step: Step, index: int) -> None:
        if step:
            steps.append(step)
            records.append(ShuffleStep("shift", index, [], [step], phase))

    # open a gap after line 1: lines 2..L slide toward the far corridor
    record_shift(sw.shift({k: 1 for k in range(2, L + 1)}), 1)
    for x in range(1, L + 1):
        if x > 1:
            # previous line moves into the near gap, line x closes up behind it
            record_shift(sw.shift({x - 1: -1, x: -1}), x)
        if x in todo:
            line = sw.lines[x]
            sub, order = oets_line(line, keys, kind, sw.loc[x])
            sw.lines[x] = order
            steps.extend(sub)
            records.append(ShuffleStep(kind, x, list(order), sub, phase))
    # everything but the last line sits one cell toward the near corridor
    record_shift(sw.shift({k: 1 for k in range(1, L)}), L)
    return steps, records, sw.matrix()


def _virtualize(layout: GarageLayout, positions: Mapping[int, Cell]) -> Matrix:
    matrix: Matrix = {}
    for v, c in positions.items():
        if not layout.is_parking(c):
            raise ShuffleError(f"vehicle {v} at {c} is not on a parking spot")
        matrix[c] = v
    hole = -1
    for c in sorted(layout.parking_spots):
        if c not in matrix:
            matrix[c] = hole
            hole -= 1
    return matrix


def _finish(positions: Mapping[int, Cell], steps: List[Step], records: List[ShuffleStep]) -> ShuffleResult:
    return ShuffleResult(plan_from_steps(dict(positions), steps), records)


def column_sort(
    layout: GarageLayout,
    positions: Mapping[int, Cell],
    rank: Mapping[int, int],
) -> ShuffleResult:
    """Column-only reconfiguration: each column sorted by rank, lowest on top.

    Empty spots sink to the bottom of their column.
    """
    matrix = _virtualize(layout, positions)
    big = len(matrix) + 1
    keys = {e: (rank[e] if e >= 0 else big - e) for e in matrix.values()}
    steps, records, _ = sweep(layout, matrix, "column", keys, "column")
    return _finish(positions, steps, records)


def column_shuffle(
    layout: GarageLayout,
    positions: Mapping[int, Cell],
    col: int,
    target: Sequence[Optional[int]],
) -> ShuffleResult:
    """Rearrange one column into ``target`` (top to bottom, ``None`` = empty).

    Requires both neighbouring columns to be free of vehicles.
    """
    return _single_line(layout, positions, "column", col, target)


def row_shuffle(
    layout: GarageLayout,
    positions: Mapping[int, Cell],
    row: int,
    target: Sequence[Optional[int]],
) -> ShuffleResult:
    """Rearrange one row into ``target`` (left to right, ``None`` = empty)."""
    return _single_line(layout, positions, "row", row, target)


def _single_line(layout, positions, kind, index, target) -> ShuffleResult:
    if kind == "column":
        cells = [Cell(1 + a, index) for a in range(layout.m1 - 2)]
        helpers = [index - 1, index + 1]
        helper_cells = [Cell(1 + a, h) for h in helpers for a in range(layout.m1 - 2)]
        limit = layout.m2
    else:
        cells = [Cell(index, 1 + a) for a in range(layout.m2 - 2)]
        helpers = [index - 1, index + 1]
        helper_cells = [Cell(h, 1 + a) for h in helpers for a in range(layout.m2 - 2)]
        limit = layout.m1
    if not all(0 <= h < limit for h in helpers):
        raise ShuffleError(f"{kind} {index} has no helper line on both sides")
    at = {c: v for v, c in positions.items()}
    busy = [c for c in helper_cells if c in at]
    if busy:
        raise ShuffleError(f"helper lines of {kind} {index} are not empty: {busy[0]} occupied")
    current = [at.get(c) for c in cells]
    if len(target) != len(cells):
        raise ShuffleError(f"target has {len(target)} entries, line has {len(cells)}")
    if sorted(v for v in current if v is not None) != sorted(v for v in target if v is not None):
        raise ShuffleError("target is not a permutation of the line's vehicles")
    hole = -1
    elems = []
    for v in current:
        if v is None:
            elems.append(hole)
            hole -= 1
        else:
            elems.append(v)
    # holes fill the empty target slots in order
    holes = [e for e in elems if e < 0]
    keys: Dict[int, int] = {}
    for pos, v in enumerate(target):
        keys[v if v is not None else holes.pop(0)] = pos
    steps, order = oets_line(elems, keys, kind, index)
    rec = ShuffleStep(kind, index, [v if v >= 0 else -1 for v in order], steps)
    return _finish(positions, steps, [rec] if steps else [])


def _matchings(layout: GarageLayout, matrix: Matrix, goal_col: Mapping[int, int]) -> List[Dict[int, int]]:
    """Split the column demand multigraph into perfect matchings."""
    W, R = layout.m2 - 2, layout.m1 - 2
    count: Dict[Tuple[int, int], int] = {}
    for c, e in matrix.items():
        key = (c.col, goal_col[e])
        count[key] = count.get(key, 0) + 1
    out = []
    for _ in range(R):
        g = nx.Graph()
        left = [("c", k) for k in range(1, W + 1)]
        g.add_nodes_from(left, bipartite=0)
        g.add_nodes_from((("g", k) for k in range(1, W + 1)), bipartite=1)
        for (c, gc), n in sorted(count.items()):
            if n > 0:
                g.add_edge(("c", c), ("g", gc))
        match = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
        m = {c: match[("c", c)][1] for c in range(1, W + 1) if ("c", c) in match}
        if len(m) != W:
            raise ShuffleError("column demand graph has no perfect matching")
        for c, gc in m.items():
            count[(c, gc)] -= 1
        out.append(m)
    return out


def rubik_reconfigure(
    layout: GarageLayout,
    start: Mapping[int, Cell],
    goal: Mapping[int, Cell],
) -> ShuffleResult:
    """Reach ``goal`` with column shuffles, row shuffles, then column shuffles."""
    if set(start) != set(goal):
        raise ShuffleError("start and goal hold different vehicle sets")
    if len(set(goal.values())) != len(goal):
        raise ShuffleError("goal assigns two vehicles to one spot")
    for v, c in goal.items():
        if not layout.is_parking(c):
            raise ShuffleError(f"goal of vehicle {v} is not a parking spot")
    matrix = _virtualize(layout, start)
    if all(start[v] == goal[v] for v in start):
        return ShuffleResult(Plan({v: [c] for v, c in start.items()}), [])
    targets: Dict[int, Cell] = dict(goal)
    free = sorted(set(layout.parking_spots) - set(goal.values()))
    virtual = sorted((c, e) for c, e in matrix.items() if e < 0)
    for (cell, e), spot in zip(virtual, free):
        targets[e] = spot
    goal_col = {e: targets[e].col for e in matrix.values()}
    goal_row = {e: targets[e].row for e in matrix.values()}

    # phase 1: each row receives one element per goal column
    rows_of: Dict[int, int] = {}
    by_col: Dict[int, List[Tuple[int, int]]] = {}
    for c, e in matrix.items():
        by_col.setdefault(c.col, []).append((c.row, e))
    for lst in by_col.values():
        lst.sort()
    for k, m in enumerate(_matchings(layout, matrix, goal_col)):
        for c, gc in m.items():
            for idx, (r, e) in enumerate(by_col[c]):
                if goal_col[e] == gc:
                    rows_of[e] = k
                    del by_col[c][idx]
                    break
    steps, records, matrix = sweep(layout, matrix, "column", rows_of, "1")
    stages = [dict(matrix)]
    # phase 2: rows send every element to its goal column
    s2, r2, matrix = sweep(layout, matrix, "row", goal_col, "2")
    # phase 3: columns send every element to its goal row
    stages.append(dict(matrix))
    s3, r3, matrix = sweep(layout, matrix, "column", goal_row, "3")
    stages.append(dict(matrix))
    steps += s2 + s3
    records += r2 + r3
    result = _finish(start, steps, records)
    result.stages = stages
    return result


def latin_rows(layout: GarageLayout, matrix: Matrix, goal_col: Mapping[int, int]) -> bool:
    """True when every parking row holds exactly one element per goal column."""
    for r in range(1, layout.m1 - 1):
        cols = sorted(goal_col[matrix[Cell(r, c)]] for c in range(1, layout.m2 - 1))
        if cols != list(range(1, layout.m2 - 1)):
            return False
    return True
