"""Batched parking/retrieval instances and their random generator."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .layout import Cell, GarageLayout


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class ParkRequest:
    vehicle: int
    port: Cell


@dataclass(frozen=True)
class RetrieveRequest:
    vehicle: int
    start: Cell
    goal: Cell


@dataclass(frozen=True)
class Resident:
    vehicle: int
    spot: Cell


@dataclass(frozen=True)
class BVPRInstance:
    layout: GarageLayout
    park: Tuple[ParkRequest, ...] = ()
    retrieve: Tuple[RetrieveRequest, ...] = ()
    resident: Tuple[Resident, ...] = ()

    def __post_init__(self) -> None:
        check_instance(self)

    @property
    def n_p(self) -> int:
        return len(self.park)

    @property
    def n_r(self) -> int:
        return len(self.retrieve)

    @property
    def n_l(self) -> int:
        return len(self.resident)

    @property
    def n_vehicles(self) -> int:
        return self.n_p + self.n_r + self.n_l

    @property
    def vehicles(self) -> List[int]:
        return sorted(self.starts)

    @property
    def tasked(self) -> List[int]:
        return sorted([p.vehicle for p in self.park] + [r.vehicle for r in self.retrieve])

    @property
    def starts(self) -> Dict[int, Cell]:
        out: Dict[int, Cell] = {}
        for p in self.park:
            out[p.vehicle] = p.port
        for r in self.retrieve:
            out[r.vehicle] = r.start
        for l in self.resident:
            out[l.vehicle] = l.spot
        return out

    @property
    def retrieval_goals(self) -> Dict[int, Cell]:
        return {r.vehicle: r.goal for r in self.retrieve}


def check_instance(inst: BVPRInstance) -> None:
    lay = inst.layout
    ids = [p.vehicle for p in inst.park] + [r.vehicle for r in inst.retrieve]
    ids += [l.vehicle for l in inst.resident]
    if sorted(ids) != list(range(len(ids))):
        raise InstanceError(f"vehicle ids must be dense 0..n-1, got {sorted(ids)}")
    starts = [p.port for p in inst.park] + [r.start for r in inst.retrieve]
    starts += [l.spot for l in inst.resident]
    if len(set(starts)) != len(starts):
        raise InstanceError("start cells must be pairwise distinct")
    used_ports: List[Cell] = []
    for p in inst.park:
        if not lay.is_port(p.port):
            raise InstanceError(f"park request {p.vehicle} does not start at a port")
        used_ports.append(p.port)
    for r in inst.retrieve:
        if not lay.is_parking(r.start):
            raise InstanceError(f"retrieval {r.vehicle} does not start on a parking spot")
        if not lay.is_port(r.goal):
            raise InstanceError(f"retrieval {r.vehicle} goal {r.goal} is not a port")
        used_ports.append(r.goal)
    for l in inst.resident:
        if not lay.is_parking(l.spot):
            raise InstanceError(f"resident {l.vehicle} is not on a parking spot")
    if len(set(used_ports)) != len(used_ports):
        raise InstanceError("a port may serve at most one task")
    if inst.n_vehicles and inst.n_vehicles >= lay.capacity:
        raise InstanceError(
            f"{inst.n_vehicles} vehicles do not fit below capacity {lay.capacity}"
        )


def densest_counts(layout: GarageLayout, n_p: int | None = None) -> Tuple[int, int, int]:
    """Counts for the densest setting: every port busy, one escort left."""
    n_o = layout.n_ports
    if n_p is None:
        n_p = n_o // 2
    n_r = n_o - n_p
    n_l = layout.capacity - 1 - n_p - n_r
    return n_p, n_r, n_l


def generate_instance(
    layout: GarageLayout, n_p: int, n_r: int, n_l: int, seed: int
) -> BVPRInstance:
    """Sample a random instance; a pure function of its arguments."""
    if min(n_p, n_r, n_l) < 0:
        raise InstanceError("counts must be non-negative")
    if n_p + n_r > layout.n_ports:
        raise InstanceError(f"{n_p + n_r} tasks need distinct ports but only {layout.n_ports} exist")
    total = n_p + n_r + n_l
    if total and total >= layout.capacity:
        raise InstanceError(f"{total} vehicles do not fit below capacity {layout.capacity}")
    rng = random.Random(seed)
    ports = list(layout.ports)
    rng.shuffle(ports)
    spots = rng.sample(layout.spots_by_row(), n_r + n_l)
    vid = 0
    park = []
    for i in range(n_p):
        park.append(ParkRequest(vid, ports[i]))
        vid += 1
    retrieve = []
    for i in range(n_r):
        retrieve.append(RetrieveRequest(vid, spots[i], ports[n_p + i]))
        vid += 1
    resident = []
    for i in range(n_l):
        resident.append(Resident(vid, spots[n_r + i]))
        vid += 1
    return BVPRInstance(layout, tuple(park), tuple(retrieve), tuple(resident))
