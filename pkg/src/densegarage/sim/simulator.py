"""Continuous parking and retrieval with online insertion of new plans.

Every new task is planned with the single-vehicle primitives against the
garage as it will look once all current plans have finished. Its vertex
entries are appended to the shared visit orders, which keeps each queue
sorted by planned entry time, and the concurrent executor advances all
vehicles one timestep per tick.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from ..csmp.mcp import DeadlockError, MCPExecutor, visit_entries
from ..csmp.primitives import PrimitiveError, single_mp_park, single_mp_retrieve
from ..csmp.state import Occupancy
from ..layout import Cell, GarageLayout
from .model import ArrivalModel, ScenarioPreset


class PortLock(Enum):
    FREE = "free"
    PARKING = "parking-in-progress"
    RETRIEVAL = "retrieval-in-progress"


@dataclass
class Task:
    vehicle: int
    kind: str
    port: Cell
    issued: int
    entries_needed: int = 0
    done: Optional[int] = None

    @property
    def latency(self) -> Optional[int]:
        return None if self.done is None else self.done - self.issued


@dataclass
class Event:
    t: int
    kind: str
    vehicle: int
    port: Cell

    def __str__(self) -> str:
        return f"{self.kind} vehicle={self.vehicle} port={self.port.col}"


@dataclass
class TickStats:
    t: int
    events: List[Event]
    moved: Dict[int, Cell]
    completed: List[Task]


@dataclass
class ScenarioStats:
    scenario: str
    seed: int
    avg_retrieval_time: float
    avg_parking_time: float
    total_moves: int
    completed_retrievals: int
    completed_parkings: int

    CSV_FIELDS = (
        "scenario", "seed", "avg_retrieval_time", "avg_parking_time",
        "total_moves", "completed_retrievals", "completed_parkings",
    )

    @property
    def avg_total_latency(self) -> float:
        n = self.completed_retrievals + self.completed_parkings
        if n == 0:
            return 0.0
        return (
            self.avg_retrieval_time * self.completed_retrievals
            + self.avg_parking_time * self.completed_parkings
        ) / n

    def csv_row(self) -> List[str]:
        return [
            self.scenario, str(self.seed), f"{self.avg_retrieval_time:.4f}",
            f"{self.avg_parking_time:.4f}", str(self.total_moves),
            str(self.completed_retrievals), str(self.completed_parkings),
        ]


class SimulationState:
    """Live garage: actual and planned-final occupancy, port locks, executor."""

    def __init__(
        self,
        layout: GarageLayout,
        initial: Optional[Dict[int, Cell]] = None,
        schedule: Optional[Sequence[int]] = None,
    ) -> None:
        self.layout = layout
        initial = dict(initial or {})
        self.executor = MCPExecutor(Occupancy(initial))
        self.planned = Occupancy(initial)
        self.port_locks: Dict[Cell, PortLock] = {p: PortLock.FREE for p in layout.ports}
        self.tasks: Dict[int, Task] = {}
        self.finished: List[Task] = []
        self.clock = 0
        self.event_log: List[Event] = []
        self.total_moves = 0
        self.next_id = max(initial, default=-1) + 1
        self.schedule = list(schedule) if schedule is not None else None
        self._schedule_pos = 0
        self.arrived = 0
        self.departed = 0
        # parking arrivals waiting at a port that could not take them yet
        self.deferred: Dict[Cell, int] = {}

    @property
    def occupancy(self) -> Occupancy:
        return self.executor.occ

    @property
    def visit_order(self):
        return self.executor.order

    def population_target(self) -> int:
        """Vehicles that will stay in the garage once current plans finish."""
        return len(self.planned)

    def can_admit_parking(self) -> bool:
        return self.population_target() + 1 <= self.layout.capacity - 1

    def eligible_for_retrieval(self) -> List[int]:
        return sorted(v for v in self.planned.pos if v not in self.tasks)


def fill(layout: GarageLayout, n: int, rng: random.Random) -> Dict[int, Cell]:
    spots = sorted(layout.parking_spots)
    return {v: c for v, c in enumerate(sorted(rng.sample(spots, n)))}


def sample_events(state: SimulationState, model: ArrivalModel, rng: random.Random) -> List[Tuple[str, Cell, Optional[int]]]:
    """Draw new requests for the free ports.

    Per free port the parking draw comes first; a port takes at most one new
    task per timestep. Returns ``(kind, port, vehicle)`` triples where the
    vehicle is ``None`` for new arrivals.
    """
    out: List[Tuple[str, Cell, Optional[int]]] = []
    chosen: List[int] = []
    retrieval_ports: List[Cell] = []
    pending_parks = len(state.deferred)
    for port in state.layout.ports:
        if state.port_locks[port] is not PortLock.FREE or port in state.deferred:
            continue
        park_draw = rng.random() < model.p_p
        retrieve_draw = rng.random() < model.p_r
        if park_draw and state.population_target() + pending_parks + 1 <= state.layout.capacity - 1:
            out.append(("park", port, None))
            pending_parks += 1
            continue
        if retrieve_draw:
            v = _pick_retrieval(state, rng, set(chosen))
            if v is not None:
                chosen.append(v)
                retrieval_ports.append(port)
    # each requested vehicle, in request order, goes to the nearest drawn port
    for v in chosen:
        col = state.planned.pos[v].col
        port = min(retrieval_ports, key=lambda p: (abs(p.col - col), p.col))
        retrieval_ports.remove(port)
        out.append(("retrieve", port, v))
    return out


def _pick_retrieval(state: SimulationState, rng: random.Random, taken: set) -> Optional[int]:
    if state.schedule is not None:
        while state._schedule_pos < len(state.schedule):
            v = state.schedule[state._schedule_pos]
            if v in state.planned.pos and v not in state.tasks and v not in taken:
                state._schedule_pos += 1
                return v
            if v not in state.planned.pos:
                state._schedule_pos += 1
                continue
            return None
        return None
    pool = [v for v in state.eligible_for_retrieval() if v not in taken]
    return rng.choice(pool) if pool else None


def online_plan_insert(
    state: SimulationState,
    kind: str,
    port: Cell,
    vehicle: Optional[int] = None,
    issued: Optional[int] = None,
) -> Optional[Task]:
    """Plan a new task on the planned final state and queue its visits.

    Returns the task, or ``None`` when a parking arrival cannot be admitted
    yet (port busy or no escort); the caller defers it to the next timestep.
    """
    lay = state.layout
    ex = state.executor
    if state.port_locks[port] is not PortLock.FREE:
        return None
    if kind == "park":
        if (
            state.occupancy.occupant(port) is not None
            or state.planned.occupant(port) is not None
            or state.visit_order.pending(port)
            or not state.can_admit_parking()
        ):
            return None
        vehicle = state.next_id
        work = state.planned.copy()
        work.place(vehicle, port)
        try:
            prim = single_mp_park(work, lay, vehicle, port)
        except PrimitiveError:
            return None
        state.next_id += 1
        state.occupancy.place(vehicle, port)
        state.planned.place(vehicle, port)
        state.port_locks[port] = PortLock.PARKING
        state.arrived += 1
    elif kind == "retrieve":
        if vehicle is None or vehicle not in state.planned.pos or vehicle in state.tasks:
            raise ValueError(f"vehicle {vehicle} cannot be retrieved now")
        prim = single_mp_retrieve(state.planned, lay, vehicle, port)
        state.port_locks[port] = PortLock.RETRIEVAL
    else:
        raise ValueError(f"unknown task kind {kind!r}")

    start = dict(state.planned.pos)
    entries = visit_entries(start, prim.steps)
    for st in prim.steps:
        state.planned.apply(st)
    ex.add_timeline(entries)
    issued = state.clock if issued is None else issued
    task = Task(vehicle, kind, port, issued, entries_needed=ex.queued.get(vehicle, 0))
    if kind == "retrieve":
        state.planned.remove(vehicle)
    state.tasks[vehicle] = task
    state.event_log.append(Event(state.clock, kind, vehicle, port))
    return task


def tick(state: SimulationState, model: ArrivalModel, rng: random.Random) -> TickStats:
    """Sample requests, plan them, advance every vehicle one timestep."""
    events = []
    for port, issued in sorted(state.deferred.items(), key=lambda kv: kv[1]):
        # retry at the original port first, then at the nearest other free port
        for alt in sorted(state.layout.ports, key=lambda p: (p != port, abs(p.col - port.col), p.col)):
            if alt != port and alt in state.deferred:
                continue
            if online_plan_insert(state, "park", alt, issued=issued) is not None:
                del state.deferred[port]
                events.append(state.event_log[-1])
                break
    for kind, port, v in sample_events(state, model, rng):
        task = online_plan_insert(state, kind, port, v)
        if task is not None:
            events.append(state.event_log[-1])
        elif kind == "park":
            state.deferred[port] = state.clock
    moved = {}
    if state.executor.pending():
        moved = state.executor.step()
        if not moved:
            # queues only grow at the back, so a stalled front never recovers
            raise DeadlockError(f"no vehicle can move at t={state.clock}")
    state.total_moves += len(moved)
    state.clock += 1
    completed = []
    for v, task in list(state.tasks.items()):
        if state.executor.entered.get(v, 0) >= task.entries_needed:
            task.done = state.clock
            completed.append(task)
            del state.tasks[v]
            state.port_locks[task.port] = PortLock.FREE
            state.finished.append(task)
            if task.kind == "retrieve":
                state.executor.forget(v)
                state.departed += 1
                state.event_log.append(Event(state.clock, "depart", v, task.port))
    return TickStats(state.clock, events, moved, completed)


def summarize(state: SimulationState, scenario: str = "", seed: int = 0) -> ScenarioStats:
    ret = [t.latency for t in state.finished if t.kind == "retrieve"]
    par = [t.latency for t in state.finished if t.kind == "park"]
    return ScenarioStats(
        scenario,
        seed,
        sum(ret) / len(ret) if ret else 0.0,
        sum(par) / len(par) if par else 0.0,
        state.total_moves,
        len(ret),
        len(par),
    )


def initial_state(layout: GarageLayout, initial_fill: str, seed: int, schedule=None) -> SimulationState:
    rng = random.Random(f"fill-{seed}")
    n = layout.capacity - 1 if initial_fill == "full" else 0
    return SimulationState(layout, fill(layout, n, rng), schedule)


def run_scenario(
    preset: ScenarioPreset,
    layout: GarageLayout,
    seed: int = 0,
    trace: Optional[List[Tuple[int, int, int, int]]] = None,
) -> ScenarioStats:
    state = initial_state(layout, preset.initial_fill, seed)
    model = preset.model(seed)
    rng = random.Random(seed)
    if trace is not None:
        trace.extend((0, v, c.row, c.col) for v, c in sorted(state.occupancy.pos.items()))
    for _ in range(preset.horizon):
        step = tick(state, model, rng)
        if trace is not None:
            trace.extend((step.t, v, c.row, c.col) for v, c in sorted(step.moved.items()))
    return summarize(state, preset.name, seed)


def retrieve_all(
    layout: GarageLayout,
    positions: Dict[int, Cell],
    schedule: Sequence[int],
    limit: int = 100_000,
) -> SimulationState:
    """Retrieve every vehicle, in schedule order, one free port at a time."""
    state = SimulationState(layout, positions, schedule)
    model = ArrivalModel(0.0, 1.0, 0)
    rng = random.Random(0)
    while len(state.occupancy) or state.tasks:
        if state.clock >= limit:
            raise RuntimeError(f"retrieve-all did not finish within {limit} timesteps")
        tick(state, model, rng)
    return state


def stats_csv(rows: Sequence[ScenarioStats]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ScenarioStats.CSV_FIELDS)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def trace_csv(trace: Sequence[Tuple[int, int, int, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "vehicle", "row", "col"))
    w.writerows(trace)
    return buf.getvalue()
