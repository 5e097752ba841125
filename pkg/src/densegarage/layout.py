"""Grid garage layout: ports on the top row, a parking block, travel corridors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Iterator, List, NamedTuple, Tuple


class Cell(NamedTuple):
    row: int
    col: int


# up, down, left, right
DIRECTIONS: Tuple[Tuple[int, int], ...] = ((-1, 0), (1, 0), (0, -1), (0, 1))


def manhattan(a: Tuple[int, int], b: Tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class GarageLayout:
    """An ``m1 x m2`` four-connected grid.

    Parking spots fill rows ``1..m1-2`` and columns ``1..m2-2``. Row 0 holds
    the ports plus travel cells; the bottom row and the two side columns are
    empty travel corridors.
    """

    m1: int
    m2: int
    ports: Tuple[Cell, ...]
    parking_spots: FrozenSet[Cell] = field(repr=False)
    travel_cells: FrozenSet[Cell] = field(repr=False)

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    @property
    def port_cols(self) -> List[int]:
        return [p.col for p in self.ports]

    @property
    def capacity(self) -> int:
        return len(self.parking_spots)

    @property
    def density(self) -> float:
        return self.capacity / (self.m1 * self.m2)

    def in_bounds(self, cell: Tuple[int, int]) -> bool:
        return 0 <= cell[0] < self.m1 and 0 <= cell[1] < self.m2

    def is_parking(self, cell: Tuple[int, int]) -> bool:
        return 1 <= cell[0] <= self.m1 - 2 and 1 <= cell[1] <= self.m2 - 2

    def is_port(self, cell: Tuple[int, int]) -> bool:
        return cell in self._port_set

    def cells(self) -> Iterator[Cell]:
        for r in range(self.m1):
            for c in range(self.m2):
                yield Cell(r, c)

    def neighbors(self, cell: Tuple[int, int]) -> Iterator[Cell]:
        r, c = cell
        for dr, dc in DIRECTIONS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < self.m1 and 0 <= nc < self.m2:
                yield Cell(nr, nc)

    def edges(self) -> Iterator[Tuple[Cell, Cell]]:
        """Undirected grid edges, each listed once."""
        for r in range(self.m1):
            for c in range(self.m2):
                if c + 1 < self.m2:
                    yield Cell(r, c), Cell(r, c + 1)
                if r + 1 < self.m1:
                    yield Cell(r, c), Cell(r + 1, c)

    def spots_by_row(self) -> List[Cell]:
        return sorted(self.parking_spots)

    def port_at_col(self, col: int) -> Cell:
        cell = Cell(0, col)
        if cell not in self._port_set:
            raise LayoutError(f"no port at column {col}")
        return cell

    @property
    def _port_set(self) -> FrozenSet[Cell]:
        # cached lazily; the dataclass is frozen so go through __dict__
        cached = self.__dict__.get("_ports_cache")
        if cached is None:
            cached = frozenset(self.ports)
            object.__setattr__(self, "_ports_cache", cached)
        return cached


def build_layout(m1: int, m2: int, port_cols: Iterable[int]) -> GarageLayout:
    """Build a layout with ports at ``(0, c)`` for each column in ``port_cols``."""
    if m1 < 3 or m2 < 3:
        raise LayoutError(f"grid {m1}x{m2} too small; need at least 3x3")
    cols = list(port_cols)
    if not cols:
        raise LayoutError("at least one port is required")
    if len(set(cols)) != len(cols):
        raise LayoutError(f"duplicate port column in {cols}")
    for c in cols:
        if not 0 <= c < m2:
            raise LayoutError(f"port column {c} out of range [0, {m2})")
    ports = tuple(Cell(0, c) for c in cols)
    spots = frozenset(Cell(r, c) for r in range(1, m1 - 1) for c in range(1, m2 - 1))
    port_set = set(ports)
    travel = frozenset(
        Cell(r, c)
        for r in range(m1)
        for c in range(m2)
        if Cell(r, c) not in spots and Cell(r, c) not in port_set
    )
    return GarageLayout(m1=m1, m2=m2, ports=ports, parking_spots=spots, travel_cells=travel)


def default_layout(m1: int, m2: int | None = None) -> GarageLayout:
    """Square-ish garage with a port above every parking column."""
    m2 = m1 if m2 is None else m2
    return build_layout(m1, m2, range(1, m2 - 1))
