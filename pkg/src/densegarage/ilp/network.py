"""Time-expanded flow network for batched parking and retrieval."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from ..instance import BVPRInstance
from ..layout import Cell, GarageLayout

Arc = Tuple[Cell, Cell]


@dataclass(frozen=True)
class Commodity:
    """Commodities ``0..n_r-1`` are single retrieval vehicles; the last one pools parks and residents."""

    index: int
    vehicles: Tuple[int, ...]
    sources: Tuple[Cell, ...]
    goal: Cell | None = None

    @property
    def aggregated(self) -> bool:
        return self.goal is None

    @property
    def supply(self) -> int:
        return len(self.vehicles)


@dataclass
class TimeExpandedNetwork:
    """Vertex copies ``u_t`` for ``0 <= t <= T`` plus a source and a sink.

    Movement arcs are the same in every layer, so they are stored once as
    ``layer_arcs``; the arc ``(u, v)`` in layer ``t`` joins ``u_t`` to
    ``v_{t+1}``. A self loop ``(u, u)`` is a wait.
    """

    layout: GarageLayout
    T: int
    layer_arcs: List[Arc]
    commodities: List[Commodity]
    feedback: List[Tuple[int, Cell, Cell]]
    supply: List[Tuple[int, Cell]]
    collection: List[Cell]
    reserved_ports: Dict[Cell, int]

    @property
    def node_count(self) -> int:
        return self.layout.m1 * self.layout.m2 * (self.T + 1) + 2

    @property
    def movement_arc_count(self) -> int:
        return len(self.layer_arcs) * self.T

    def movement_arcs(self):
        for t in range(self.T):
            for u, v in self.layer_arcs:
                yield u, v, t


def commodities_of(instance: BVPRInstance) -> List[Commodity]:
    out = [
        Commodity(k, (r.vehicle,), (r.start,), r.goal)
        for k, r in enumerate(sorted(instance.retrieve, key=lambda r: r.vehicle))
    ]
    pooled = sorted(
        [(p.vehicle, p.port) for p in instance.park] + [(l.vehicle, l.spot) for l in instance.resident]
    )
    out.append(Commodity(len(out), tuple(v for v, _ in pooled), tuple(c for _, c in pooled)))
    return out


def reserved_ports(instance: BVPRInstance) -> Dict[Cell, int]:
    """Port cells that are a task's start or goal, mapped to the owning vehicle."""
    owners = {p.port: p.vehicle for p in instance.park}
    owners.update({r.goal: r.vehicle for r in instance.retrieve})
    return owners


def build_network(instance: BVPRInstance, T: int) -> TimeExpandedNetwork:
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    lay = instance.layout
    arcs: List[Arc] = []
    for u in lay.cells():
        arcs.append((u, u))
        for v in lay.neighbors(u):
            arcs.append((u, v))
    comms = commodities_of(instance)
    feedback = [(c.index, c.goal, c.sources[0]) for c in comms if not c.aggregated]
    pooled = comms[-1]
    supply = list(zip(pooled.vehicles, pooled.sources))
    collection = sorted(lay.parking_spots)
    return TimeExpandedNetwork(
        lay, T, arcs, comms, feedback, supply, collection, reserved_ports(instance)
    )
