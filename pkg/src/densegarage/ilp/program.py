"""Binary program encoding of the time-expanded network."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np
from scipy import sparse

from ..layout import Cell, GarageLayout
from .network import TimeExpandedNetwork

INF = float("inf")


@dataclass
class Constraint:
    coeffs: Dict[int, int]
    lo: float
    hi: float
    tag: str


@dataclass
class BinaryProgram:
    """Minimize ``objective . x`` subject to ``lo <= A x <= hi`` with ``x`` binary.

    ``keys`` describe each variable: ``("x", i, u, v, t)`` for movement arcs,
    ``("f", i)`` for feedback arcs, ``("s", vehicle)`` for supply arcs and
    ``("y", u)`` for collection arcs.
    """

    keys: List[tuple] = field(default_factory=list)
    objective: List[int] = field(default_factory=list)
    constraints: List[Constraint] = field(default_factory=list)
    index: Dict[tuple, int] = field(default_factory=dict)

    @property
    def n_vars(self) -> int:
        return len(self.keys)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def add_var(self, key: tuple, cost: int = 0) -> int:
        self.index[key] = len(self.keys)
        self.keys.append(key)
        self.objective.append(cost)
        return self.index[key]

    def add(self, coeffs: Dict[int, int], lo: float, hi: float, tag: str) -> None:
        self.constraints.append(Constraint(coeffs, lo, hi, tag))

    def matrices(self) -> Tuple[np.ndarray, sparse.csr_matrix, np.ndarray, np.ndarray]:
        rows, cols, vals = [], [], []
        for r, con in enumerate(self.constraints):
            for j, a in con.coeffs.items():
                rows.append(r)
                cols.append(j)
                vals.append(a)
        A = sparse.csr_matrix(
            (vals, (rows, cols)), shape=(len(self.constraints), len(self.keys)), dtype=float
        )
        lo = np.array([c.lo for c in self.constraints], dtype=float)
        hi = np.array([c.hi for c in self.constraints], dtype=float)
        return np.array(self.objective, dtype=float), A, lo, hi

    def violated(self, x: Iterable[int]) -> List[str]:
        """Tags of constraints a 0/1 assignment breaks (for self checks)."""
        xs = list(x)
        bad = []
        for con in self.constraints:
            s = sum(a * xs[j] for j, a in con.coeffs.items())
            if s < con.lo - 1e-9 or s > con.hi + 1e-9:
                bad.append(con.tag)
        return bad


def _grid_distances(layout: GarageLayout, sources: Iterable[Cell]) -> Dict[Cell, int]:
    dist: Dict[Cell, int] = {}
    queue = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        for v in layout.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _perpendicular(a: Tuple[Cell, Cell], b: Tuple[Cell, Cell]) -> bool:
    da = (a[1][0] - a[0][0], a[1][1] - a[0][1])
    db = (b[1][0] - b[0][0], b[1][1] - b[0][1])
    return da[0] * db[0] + da[1] * db[1] == 0


def encode(network: TimeExpandedNetwork, prune: bool = True) -> BinaryProgram:
    """Encode flow conservation, vertex capacity, anti-swap, perpendicular
    following and arrival constraints.

    With ``prune`` a movement variable is created only when its arc lies on
    some path from the commodity's sources to its targets within the horizon;
    the optimum is unchanged.
    """
    lay, T = network.layout, network.T
    prog = BinaryProgram()
    reserved = network.reserved_ports
    spots = set(lay.parking_spots)

    # movement variables
    for com in network.commodities:
        targets = spots if com.aggregated else {com.goal}
        d_src = _grid_distances(lay, com.sources) if prune else None
        d_dst = _grid_distances(lay, targets) if prune else None
        if com.supply == 0:
            continue
        for t in range(T):
            for u, v in network.layer_arcs:
                if u != v and v in reserved and v != com.goal:
                    continue
                if prune and (d_src.get(u, INF) > t or d_dst.get(v, INF) > T - 1 - t):
                    continue
                prog.add_var(("x", com.index, u, v, t), 0 if u == v else 1)
    fvars = {i: prog.add_var(("f", i)) for i, _, _ in network.feedback}
    svars = {veh: prog.add_var(("s", veh)) for veh, _ in network.supply}
    yvars = {u: prog.add_var(("y", u)) for u in network.collection}

    out_arcs: Dict[Tuple[int, Cell, int], List[int]] = {}
    in_arcs: Dict[Tuple[int, Cell, int], List[int]] = {}
    by_arc: Dict[Tuple[Cell, Cell, int], List[int]] = {}
    for j, key in enumerate(prog.keys):
        if key[0] != "x":
            continue
        _, i, u, v, t = key
        out_arcs.setdefault((i, u, t), []).append(j)
        in_arcs.setdefault((i, v, t + 1), []).append(j)
        by_arc.setdefault((u, v, t), []).append(j)

    # flow conservation per commodity and vertex copy
    for com in network.commodities:
        i = com.index
        inject: Dict[Cell, List[int]] = {}
        drain: Dict[Cell, List[int]] = {}
        if com.aggregated:
            for veh, s in network.supply:
                inject.setdefault(s, []).append(svars[veh])
            for u in network.collection:
                drain.setdefault(u, []).append(yvars[u])
        else:
            inject[com.sources[0]] = [fvars[i]]
            drain[com.goal] = [fvars[i]]
        for t in range(T + 1):
            for u in lay.cells():
                coeffs: Dict[int, int] = {}
                ins = in_arcs.get((i, u, t), []) if t > 0 else inject.get(u, [])
                outs = out_arcs.get((i, u, t), []) if t < T else drain.get(u, [])
                for j in ins:
                    coeffs[j] = coeffs.get(j, 0) + 1
                for j in outs:
                    coeffs[j] = coeffs.get(j, 0) - 1
                coeffs = {j: a for j, a in coeffs.items() if a != 0}
                if coeffs:
                    prog.add(coeffs, 0, 0, f"flow[{i},{u.row},{u.col},{t}]")

    # vertex capacity: at most one unit leaves each vertex copy, at most one enters the last layer
    for t in range(T + 1):
        for u in lay.cells():
            if t < T:
                js = [j for com in network.commodities for j in out_arcs.get((com.index, u, t), [])]
            else:
                js = [j for com in network.commodities for j in in_arcs.get((com.index, u, t), [])]
            if len(js) > 1:
                prog.add({j: 1 for j in js}, -INF, 1, f"vertex[{u.row},{u.col},{t}]")

    for t in range(T):
        # no swaps along an edge
        for u, v in lay.edges():
            js = by_arc.get((u, v, t), []) + by_arc.get((v, u, t), [])
            if len(by_arc.get((u, v, t), [])) and len(by_arc.get((v, u, t), [])):
                prog.add({j: 1 for j in js}, -INF, 1, f"swap[{u.row},{u.col},{v.row},{v.col},{t}]")
        # no entering a vertex while its occupant leaves perpendicularly
        for v in lay.cells():
            for u in lay.neighbors(v):
                enter = by_arc.get((u, v, t), [])
                if not enter:
                    continue
                for w in lay.neighbors(v):
                    if not _perpendicular((u, v), (v, w)):
                        continue
                    leave = by_arc.get((v, w, t), [])
                    if leave:
                        coeffs = {j: 1 for j in enter + leave}
                        prog.add(
                            coeffs,
                            -INF,
                            1,
                            f"perp[{u.row},{u.col},{v.row},{v.col},{w.row},{w.col},{t}]",
                        )

    # source supply and arrival accounting
    if svars:
        prog.add({j: 1 for j in svars.values()}, len(svars), len(svars), "supply")
    arrival = {j: 1 for j in fvars.values()}
    arrival.update({j: 1 for j in yvars.values()})
    n = sum(c.supply for c in network.commodities)
    if arrival or n:
        prog.add(arrival, n, n, "arrival")
    return prog


def _lp_name(key: tuple) -> str:
    if key[0] == "x":
        _, i, u, v, t = key
        return f"x_{i}_{u.row}_{u.col}_{v.row}_{v.col}_{t}"
    if key[0] == "y":
        return f"y_{key[1].row}_{key[1].col}"
    return f"{key[0]}_{key[1]}"


def _lp_terms(coeffs: Dict[int, int], names: List[str]) -> str:
    parts = []
    for j, a in sorted(coeffs.items()):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        parts.append(f"{sign} {'' if mag == 1 else f'{mag} '}{names[j]}")
    text = " ".join(parts) if parts else "0"
    return text[2:] if text.startswith("+ ") else text


def write_lp(prog: BinaryProgram) -> str:
    """Render the program in CPLEX LP text format."""
    names = [_lp_name(k) for k in prog.keys]
    lines = ["\\ batched parking and retrieval", "Minimize", " obj: "]
    obj = {j: c for j, c in enumerate(prog.objective) if c}
    lines[-1] += _lp_terms(obj, names) if obj else "0"
    lines.append("Subject To")
    for k, con in enumerate(prog.constraints):
        expr = _lp_terms(con.coeffs, names)
        label = f" c{k}:"
        if con.lo == con.hi:
            lines.append(f"{label} {expr} = {int(con.lo)}")
        else:
            if con.hi != INF:
                lines.append(f"{label} {expr} <= {int(con.hi)}")
            if con.lo != -INF:
                lines.append(f" c{k}_lo: {expr} >= {int(con.lo)}")
    lines.append("Binary")
    for k in range(0, len(names), 8):
        lines.append(" " + " ".join(names[k : k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"
