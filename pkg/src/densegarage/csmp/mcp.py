"""Order-preserving concurrent execution of sequential plans.

Each vehicle follows its wait-free path. It may enter its next vertex only if
it is the next vehicle planned to enter that vertex and the vertex is either
empty or being vacated this timestep by a vehicle moving in a non-perpendicular
direction.
"""

from __future__ import annotations

from collections import deque
from typing import Deque, Dict, Iterable, List, Mapping, Sequence, Tuple

from ..layout import Cell
from .state import Occupancy, VisitOrder


class DeadlockError(RuntimeError):
    pass


class MCPExecutor:
    """Shared execution state: occupancy, visit orders and remaining paths."""

    def __init__(self, occupancy: Occupancy) -> None:
        self.occ = occupancy
        self.order = VisitOrder()
        self.remaining: Dict[int, Deque[Cell]] = {}
        self.queued: Dict[int, int] = {}
        self.entered: Dict[int, int] = {}
        self._memo: Dict[int, bool] = {}
        self._active: set = set()

    def add_timeline(self, entries: Iterable[Tuple[int, Cell]]) -> None:
        """Append planned vertex entries, given in nondecreasing planned time."""
        for v, cell in entries:
            self.order.push(cell, v)
            self.remaining.setdefault(v, deque()).append(cell)
            self.queued[v] = self.queued.get(v, 0) + 1

    def busy(self, v: int) -> bool:
        return bool(self.remaining.get(v))

    def pending(self) -> List[int]:
        return [v for v, p in self.remaining.items() if p]

    def mcp_move(self, i: int) -> bool:
        """Decide whether ``i`` moves this timestep (memoized per timestep)."""
        memo = self._memo
        if i in memo:
            return memo[i]
        path = self.remaining.get(i)
        if not path or i in self._active:
            # nothing left to do, or a cycle of mutual waits through i
            return False
        target = path[0]
        if self.order.front(target) != i:
            memo[i] = False
            return False
        self._active.add(i)
        j = self.occ.at.get(target)
        ok = True
        if j is not None:
            ok = self.mcp_move(j)
            if ok:
                u, jn = self.occ.pos[j], self.remaining[j][0]
                ui = self.occ.pos[i]
                di = (target[0] - ui[0], target[1] - ui[1])
                dj = (jn[0] - u[0], jn[1] - u[1])
                ok = di[0] * dj[0] + di[1] * dj[1] != 0
        self._active.discard(i)
        memo[i] = ok
        return ok

    def step(self, vehicles: Sequence[int] | None = None) -> Dict[int, Cell]:
        """Run one timestep; returns the moves applied."""
        self._memo = {}
        self._active = set()
        candidates = self.pending() if vehicles is None else vehicles
        for v in candidates:
            self.mcp_move(v)
        moved = {v: self.remaining[v][0] for v, ok in self._memo.items() if ok}
        self.occ.apply(moved)
        for v, cell in moved.items():
            self.order.pop(cell, v)
            self.remaining[v].popleft()
            self.entered[v] = self.entered.get(v, 0) + 1
        return moved

    def forget(self, v: int) -> None:
        """Drop a vehicle that has left the garage."""
        if self.remaining.get(v):
            raise RuntimeError(f"vehicle {v} still has planned moves")
        self.remaining.pop(v, None)
        self.occ.remove(v)


def visit_entries(start: Mapping[int, Cell], steps: Sequence[Mapping[int, Cell]]) -> List[Tuple[int, Cell]]:
    """Vertex entries in planned order; a vehicle that keeps its cell adds none."""
    pos = dict(start)
    out: List[Tuple[int, Cell]] = []
    for step in steps:
        for v in sorted(step):
            if step[v] != pos[v]:
                out.append((v, step[v]))
                pos[v] = step[v]
    return out


def run_mcp(start: Mapping[int, Cell], steps: Sequence[Mapping[int, Cell]], limit: int | None = None) -> List[Dict[int, Cell]]:
    """Execute a sequential step list concurrently; returns the executed steps."""
    ex = MCPExecutor(Occupancy(start))
    ex.add_timeline(visit_entries(start, steps))
    executed: List[Dict[int, Cell]] = []
    while ex.pending():
        moved = ex.step()
        if not moved:
            raise DeadlockError(f"no vehicle can move at t={len(executed)}")
        executed.append(moved)
        if limit is not None and len(executed) > limit:
            raise DeadlockError(f"execution exceeded {limit} timesteps")
    return executed
