"""Single-vehicle motion primitives for parking and retrieval.

A primitive returns a list of timesteps; each timestep maps the vehicles that
move to their new cells. Blockers are pushed aside by convoy shifts: a
contiguous run of vehicles in one row (or column) slides one cell toward the
nearest empty cell, all in the same direction, so the shift is collision free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from ..layout import Cell, GarageLayout, manhattan
from .state import Occupancy

Step = Dict[int, Cell]


class PrimitiveError(RuntimeError):
    pass


@dataclass
class Shift:
    """A convoy: ``run`` lists the vehicles' cells starting at the cleared cell."""

    run: List[Cell]
    direction: Tuple[int, int]
    vehicles: List[int]

    @property
    def landing(self) -> Cell:
        last = self.run[-1]
        return Cell(last[0] + self.direction[0], last[1] + self.direction[1])

    def forward(self) -> Step:
        dr, dc = self.direction
        return {v: Cell(c[0] + dr, c[1] + dc) for v, c in zip(self.vehicles, self.run)}

    def backward(self) -> Step:
        return {v: c for v, c in zip(self.vehicles, self.run)}


def find_shift(
    occ: Occupancy,
    layout: GarageLayout,
    start: Cell,
    direction: Tuple[int, int],
    allowed: Callable[[Cell], bool] = lambda c: True,
) -> Optional[Shift]:
    """Run of occupied cells from ``start`` along ``direction`` up to the first free cell."""
    dr, dc = direction
    run: List[Cell] = []
    vehicles: List[int] = []
    cur = start
    while True:
        v = occ.occupant(cur)
        if v is None:
            break
        run.append(cur)
        vehicles.append(v)
        cur = Cell(cur[0] + dr, cur[1] + dc)
        if not layout.in_bounds(cur) or not allowed(cur):
            return None
    if not run:
        return None
    return Shift(run, direction, vehicles)


def _nearest_shift(
    occ: Occupancy,
    layout: GarageLayout,
    start: Cell,
    directions: List[Tuple[int, int]],
    allowed: Callable[[Cell], bool] = lambda c: True,
) -> Shift:
    """Shortest convoy clearing ``start``; ties go to the earlier direction."""
    best: Optional[Shift] = None
    for d in directions:
        s = find_shift(occ, layout, start, d, allowed)
        if s is not None and (best is None or len(s.run) < len(best.run)):
            best = s
    if best is None:
        raise PrimitiveError(f"no free cell to clear {start}")
    return best


LEFT, RIGHT, UP, DOWN = (0, -1), (0, 1), (-1, 0), (1, 0)


def _merge(*steps: Step) -> Step:
    out: Step = {}
    for s in steps:
        out.update(s)
    return out


@dataclass
class PrimitivePlan:
    steps: List[Step] = field(default_factory=list)
    route: str = ""
    blockers: int = 0

    @property
    def span(self) -> int:
        return len(self.steps)


def _clear_row_runs(
    occ: Occupancy, layout: GarageLayout, cells: List[Cell]
) -> List[Shift]:
    shifts = []
    for cell in cells:
        if occ.occupant(cell) is not None:
            shifts.append(_nearest_shift(occ, layout, cell, [LEFT, RIGHT]))
    return shifts


def _phase(shifts: List[Shift], serial: bool, back: bool = False) -> List[Step]:
    """Timesteps realizing independent convoys: one per line, or all at once."""
    moves = [s.backward() if back else s.forward() for s in shifts]
    if not moves:
        return []
    return moves if serial else [_merge(*moves)]


def _corridor_shifts(layout: GarageLayout, shifts: List[Shift]) -> List[Shift]:
    return [s for s in shifts if not layout.is_parking(s.landing)]


def _walk(v: int, cells: List[Cell]) -> List[Step]:
    return [{v: c} for c in cells]


def single_mp_retrieve(
    occ: Occupancy,
    layout: GarageLayout,
    vehicle: int,
    goal: Cell,
    allow_detour: bool = True,
    serial: bool = True,
) -> PrimitivePlan:
    """Carry ``vehicle`` from its parking spot to the port ``goal``.

    The default route goes straight up the vehicle's column to row 0, then
    along row 0 to the port. Each blocker above the vehicle slides, together
    with the rest of its row segment, one cell toward the nearest free cell of
    its row; with ``serial`` one row is shifted per timestep, otherwise all
    rows shift at once. Vehicles pushed into a corridor slide back once the
    vehicle has left the column.

    When row 0 is obstructed (a vehicle waits or has been delivered at a port
    on the way) the vehicle instead travels along its own row to the port's
    column and then straight up, clearing the way with vertical shifts.
    """
    if not layout.is_port(goal):
        raise PrimitiveError(f"goal {goal} is not a port")
    if vehicle not in occ.pos:
        raise PrimitiveError(f"vehicle {vehicle} not found")
    start = occ.pos[vehicle]
    if not layout.is_parking(start):
        raise PrimitiveError(f"vehicle {vehicle} at {start} is not parked")
    r, c = start
    p = goal.col
    lo, hi = min(c, p), max(c, p)
    row0_clear = all(occ.occupant(Cell(0, x)) is None for x in range(lo, hi + 1))
    if row0_clear:
        return _retrieve_via_row0(occ, layout, vehicle, start, goal, serial)
    if not allow_detour:
        raise PrimitiveError(f"row 0 between columns {lo} and {hi} is obstructed")
    return _retrieve_via_own_row(occ, layout, vehicle, start, goal, serial)


def _retrieve_via_row0(
    occ: Occupancy, layout: GarageLayout, vehicle: int, start: Cell, goal: Cell, serial: bool
) -> PrimitivePlan:
    r, c = start
    p = goal.col
    shifts = _clear_row_runs(occ, layout, [Cell(rr, c) for rr in range(r - 1, 0, -1)])
    steps = _phase(shifts, serial)
    steps += _walk(vehicle, [Cell(rr, c) for rr in range(r - 1, -1, -1)])
    sgn = 1 if p > c else -1
    horizontal = [Cell(0, x) for x in range(c + sgn, p + sgn, sgn)] if p != c else []
    # the column is clear once the vehicle reaches row 0; restores run in rows >= 1
    restore = _phase(_corridor_shifts(layout, shifts)[::-1], serial, back=True)
    walk = _walk(vehicle, horizontal)
    for k in range(max(len(walk), len(restore))):
        steps.append(_merge(restore[k] if k < len(restore) else {}, walk[k] if k < len(walk) else {}))
    return PrimitivePlan(steps, route="row0", blockers=sum(len(s.run) for s in shifts))


def _retrieve_via_own_row(
    occ: Occupancy, layout: GarageLayout, vehicle: int, start: Cell, goal: Cell, serial: bool
) -> PrimitivePlan:
    r, c = start
    p = goal.col
    sgn = 1 if p > c else -1
    work = occ.copy()
    steps: List[Step] = []

    # vertical shifts clear the vehicle's row between its column and the port column
    not_row0 = lambda cell: cell[0] != 0
    vshifts = []
    for x in range(c + sgn, p + sgn, sgn):
        cell = Cell(r, x)
        if work.occupant(cell) is None:
            continue
        dirs = [DOWN] if x == p else [DOWN, UP]
        vshifts.append(_nearest_shift(work, layout, cell, dirs, not_row0))
    for st in _phase(vshifts, serial):
        work.apply(st)
        steps.append(st)

    # horizontal shifts clear the port column above the vehicle's row
    hshifts = _clear_row_runs(work, layout, [Cell(rr, p) for rr in range(r - 1, 0, -1)])
    for st in _phase(hshifts, serial):
        work.apply(st)
        steps.append(st)

    horizontal = [Cell(r, x) for x in range(c + sgn, p + sgn, sgn)]
    vertical = [Cell(rr, p) for rr in range(r - 1, -1, -1)]
    steps += _walk(vehicle, horizontal)
    # rows >= r are clear once the vehicle turns up the port column
    vrestore = _phase(_corridor_shifts(layout, vshifts)[::-1], serial, back=True)
    walk = _walk(vehicle, vertical)
    for k in range(max(len(walk), len(vrestore))):
        steps.append(_merge(vrestore[k] if k < len(vrestore) else {}, walk[k] if k < len(walk) else {}))
    steps += _phase(_corridor_shifts(layout, hshifts)[::-1], serial, back=True)
    blockers = sum(len(s.run) for s in vshifts + hshifts)
    return PrimitivePlan(steps, route="own-row", blockers=blockers)


def nearest_escort(occ: Occupancy, layout: GarageLayout, target: Cell) -> Optional[Cell]:
    """Closest empty parking spot to ``target``; ties to lower row, then lower column."""
    best = None
    best_key = None
    for spot in layout.parking_spots:
        if spot in occ.at:
            continue
        key = (manhattan(spot, target), spot[0], spot[1])
        if best_key is None or key < best_key:
            best, best_key = spot, key
    return best


def single_mp_park(occ: Occupancy, layout: GarageLayout, vehicle: int, port: Cell) -> PrimitivePlan:
    """Park the vehicle waiting at ``port`` in the spot right below it.

    The nearest escort (empty spot) is first slid along its row into the
    port's column in one timestep, then up the column in a second one; the
    vehicle then drives down into it. Executed concurrently, the vehicle
    follows the column convoy in the same direction, so parking finishes
    within two timesteps.
    """
    if occ.pos.get(vehicle) != port:
        raise PrimitiveError(f"vehicle {vehicle} is not at port {port}")
    if not layout.is_port(port):
        raise PrimitiveError(f"{port} is not a port")
    q = port.col
    border = not 1 <= q <= layout.m2 - 2
    col = 1 if q == 0 else (layout.m2 - 2 if border else q)
    target = Cell(1, col)
    escort = nearest_escort(occ, layout, target)
    if escort is None:
        raise PrimitiveError("no escort available")
    re, ce = escort
    steps: List[Step] = []
    if ce != col:
        d = RIGHT if ce > col else LEFT
        s = find_shift(occ, layout, Cell(re, col), d)
        assert s is not None and s.landing == escort
        steps.append(s.forward())
    vertical: Step = {}
    if re != 1:
        work = occ.copy()
        for st in steps:
            work.apply(st)
        s = find_shift(work, layout, target, DOWN)
        assert s is not None and s.landing == Cell(re, col)
        vertical = s.forward()
    if border:
        # through the side corridor: down first, then sideways into the spot
        corner = Cell(1, q)
        if steps:
            steps[0][vehicle] = corner
        else:
            steps.append({vehicle: corner})
        if vertical:
            steps.append(vertical)
        steps.append({vehicle: target})
    else:
        if vertical:
            steps.append(vertical)
        steps.append({vehicle: target})
    return PrimitivePlan(steps, route="park")
