"""Makespan-optimal planning by iterative deepening over the horizon."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..instance import BVPRInstance
from ..layout import Cell, manhattan
from ..plan import Plan
from .backends import HighsBackend, SolveTimeout
from .network import TimeExpandedNetwork, build_network
from .program import BinaryProgram, encode


class HorizonExhausted(RuntimeError):
    pass


class ExtractionError(RuntimeError):
    pass


@dataclass
class SolveStats:
    T_final: int
    variables: int
    constraints: int
    nodes_explored: int
    runtime_ms: float
    objective: int = 0

    CSV_FIELDS = ("T_final", "variables", "constraints", "nodes_explored", "runtime_ms")

    def csv_row(self) -> List[str]:
        return [str(self.T_final), str(self.variables), str(self.constraints),
                str(self.nodes_explored), f"{self.runtime_ms:.1f}"]


def horizon_lower_bound(instance: BVPRInstance) -> int:
    lb = max((manhattan(r.start, r.goal) for r in instance.retrieve), default=0)
    if instance.n_p > 0:
        lb = max(lb, 1)
    return lb


def extract_paths(x: Sequence[int], prog: BinaryProgram, network: TimeExpandedNetwork) -> Plan:
    """Follow the unit flows of a feasible assignment back to vehicle paths.

    Vertex capacity allows at most one unit of flow out of any vertex copy,
    so each path has a unique successor at every layer.
    """
    succ: Dict[Tuple[int, Cell, int], Cell] = {}
    for j, key in enumerate(prog.keys):
        if key[0] != "x" or not x[j]:
            continue
        _, i, u, v, t = key
        if (i, u, t) in succ:
            raise ExtractionError(f"commodity {i} splits at {u} t={t}")
        succ[(i, u, t)] = v
    paths: Dict[int, List[Cell]] = {}
    for com in network.commodities:
        for veh, src in zip(com.vehicles, com.sources):
            path = [src]
            for t in range(network.T):
                nxt = succ.get((com.index, path[-1], t))
                if nxt is None:
                    raise ExtractionError(f"vehicle {veh} has no flow out of {path[-1]} at t={t}")
                path.append(nxt)
            paths[veh] = path
    return Plan(paths)


def solve_at(instance: BVPRInstance, T: int, backend=None, prune: bool = True):
    """Solve for a fixed horizon; returns ``(plan or None, program, backend result)``."""
    backend = backend or HighsBackend()
    net = build_network(instance, T)
    prog = encode(net, prune=prune)
    res = backend.solve(prog)
    if not res.feasible:
        return None, prog, res
    return extract_paths(res.x, prog, net), prog, res


def solve_bvpr_optimal(
    instance: BVPRInstance,
    T_max: int | None = None,
    backend=None,
    prune: bool = True,
    on_program: Optional[Callable[[int, BinaryProgram], None]] = None,
    time_limit: float | None = None,
) -> Tuple[Plan, SolveStats]:
    """Smallest feasible horizon, with total moves minimized at that horizon.

    ``time_limit`` bounds the wall clock of the whole deepening loop; the
    backend's own limit is tightened to the remaining budget before each call.
    """
    backend = backend or HighsBackend()
    lay = instance.layout
    if T_max is None:
        T_max = max(lay.m1 * lay.m2 * max(instance.n_vehicles, 1), 1)
    start = time.monotonic()
    nodes = 0
    own_limit = backend.time_limit
    T = horizon_lower_bound(instance)
    try:
        while T <= T_max:
            if time_limit is not None:
                remaining = time_limit - (time.monotonic() - start)
                if remaining <= 0:
                    raise SolveTimeout(f"no plan found within {time_limit} s (reached T={T})")
                backend.time_limit = remaining if own_limit is None else min(own_limit, remaining)
            plan, prog, res = solve_at(instance, T, backend, prune)
            nodes += res.nodes
            if on_program is not None:
                on_program(T, prog)
            if plan is not None:
                if not instance.vehicles:
                    plan = Plan({})
                stats = SolveStats(
                    T, prog.n_vars, prog.n_constraints, nodes,
                    (time.monotonic() - start) * 1000.0, res.objective or 0,
                )
                return plan, stats
            T += 1
    finally:
        backend.time_limit = own_limit
    raise HorizonExhausted(f"no plan within horizon {T_max}")
