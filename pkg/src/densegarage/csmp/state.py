from __future__ import annotations

from collections import deque
from typing import Deque, Dict, Iterator, List, Mapping, Optional, Tuple

from ..layout import Cell


class Occupancy:
    """Bijective map between occupied cells and vehicle ids."""

    def __init__(self, positions: Mapping[int, Tuple[int, int]] | None = None) -> None:
        self.at: Dict[Cell, int] = {}
        self.pos: Dict[int, Cell] = {}
        for v, c in (positions or {}).items():
            self.place(v, Cell(*c))

    def __contains__(self, cell: object) -> bool:
        return cell in self.at

    def __len__(self) -> int:
        return len(self.pos)

    def occupant(self, cell: Tuple[int, int]) -> Optional[int]:
        return self.at.get(cell)  # type: ignore[arg-type]

    def place(self, v: int, cell: Cell) -> None:
        if cell in self.at:
            raise ValueError(f"cell {cell} already holds vehicle {self.at[cell]}")
        if v in self.pos:
            raise ValueError(f"vehicle {v} already placed")
        self.at[cell] = v
        self.pos[v] = cell

    def remove(self, v: int) -> Cell:
        cell = self.pos.pop(v)
        del self.at[cell]
        return cell

    def apply(self, step: Mapping[int, Cell]) -> None:
        """Apply one simultaneous timestep of moves."""
        for v in step:
            del self.at[self.pos[v]]
        for v, cell in step.items():
            if cell in self.at:
                raise ValueError(f"step moves vehicle {v} into occupied cell {cell}")
            self.at[cell] = v
            self.pos[v] = cell

    def copy(self) -> "Occupancy":
        out = Occupancy()
        out.at = dict(self.at)
        out.pos = dict(self.pos)
        return out

    def vehicles(self) -> Iterator[int]:
        return iter(self.pos)


class VisitOrder:
    """Per-vertex FIFO of vehicles, in planned order of entering the vertex."""

    def __init__(self) -> None:
        self.queues: Dict[Cell, Deque[int]] = {}

    def push(self, cell: Cell, v: int) -> None:
        self.queues.setdefault(cell, deque()).append(v)

    def front(self, cell: Cell) -> Optional[int]:
        q = self.queues.get(cell)
        return q[0] if q else None

    def pop(self, cell: Cell, v: int) -> None:
        q = self.queues[cell]
        if not q or q[0] != v:
            raise RuntimeError(f"visit order of {cell} violated by vehicle {v}")
        q.popleft()
        if not q:
            del self.queues[cell]

    def pending(self, cell: Cell) -> int:
        q = self.queues.get(cell)
        return len(q) if q else 0

    def sequence(self, cell: Cell) -> List[int]:
        return list(self.queues.get(cell, ()))

    def empty(self) -> bool:
        return not self.queues
