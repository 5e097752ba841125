"""Solver backends for :class:`BinaryProgram`."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse import vstack

from .program import BinaryProgram


class BackendError(RuntimeError):
    pass


class SolveTimeout(BackendError):
    pass


@dataclass
class BackendResult:
    feasible: bool
    x: List[int] = field(default_factory=list)
    objective: Optional[int] = None
    nodes: int = 0


class HighsBackend:
    """Mixed-integer solve through the HiGHS solver bundled with SciPy."""

    name = "highs"

    def __init__(self, time_limit: float | None = None) -> None:
        self.time_limit = time_limit

    def solve(self, prog: BinaryProgram) -> BackendResult:
        if prog.n_vars == 0:
            ok = all(c.lo <= 0 <= c.hi for c in prog.constraints)
            return BackendResult(ok, [], 0 if ok else None)
        c, A, lo, hi = prog.matrices()
        options = {"presolve": True}
        if self.time_limit is not None:
            options["time_limit"] = self.time_limit
        res = milp(
            c,
            constraints=LinearConstraint(A, lo, hi) if A.shape[0] else None,
            integrality=np.ones(prog.n_vars),
            bounds=Bounds(0, 1),
            options=options,
        )
        nodes = int(getattr(res, "mip_node_count", 0) or 0)
        if res.status == 0:
            x = [int(round(v)) for v in res.x]
            return BackendResult(True, x, int(round(res.fun)), nodes)
        if res.status == 2:
            return BackendResult(False, nodes=nodes)
        if res.status == 1:
            raise SolveTimeout(res.message)
        raise BackendError(f"HiGHS failed: {res.message}")


class BranchAndBoundBackend:
    """Depth-first 0/1 branch and bound with LP-relaxation bounds.

    Branches on the most fractional variable, trying the value it leans
    toward first. The objective is integral, so a node is pruned once the
    ceiling of its relaxation reaches the incumbent.
    """

    name = "bnb"

    def __init__(self, time_limit: float | None = None, node_limit: int = 1_000_000) -> None:
        self.time_limit = time_limit
        self.node_limit = node_limit

    def _relax(self, c, A_ub, b_ub, A_eq, b_eq, lb, ub):
        res = linprog(
            c,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=np.column_stack([lb, ub]),
            method="highs",
        )
        if res.status == 2:
            return None
        if res.status != 0:
            raise BackendError(f"LP relaxation failed: {res.message}")
        return res

    def solve(self, prog: BinaryProgram) -> BackendResult:
        n = prog.n_vars
        if n == 0:
            ok = all(c.lo <= 0 <= c.hi for c in prog.constraints)
            return BackendResult(ok, [], 0 if ok else None)
        c, A, lo, hi = prog.matrices()
        eq = lo == hi
        ub_hi = (~eq) & np.isfinite(hi)
        ub_lo = (~eq) & np.isfinite(lo)
        A_eq = A[eq] if eq.any() else None
        b_eq = lo[eq] if eq.any() else None
        parts, rhs = [], []
        if ub_hi.any():
            parts.append(A[ub_hi])
            rhs.append(hi[ub_hi])
        if ub_lo.any():
            parts.append(-A[ub_lo])
            rhs.append(-lo[ub_lo])
        A_ub = vstack(parts).tocsr() if parts else None
        b_ub = np.concatenate(rhs) if rhs else None

        start = time.monotonic()
        best_obj = math.inf
        best_x: Optional[np.ndarray] = None
        nodes = 0
        stack = [(np.zeros(n), np.ones(n))]
        while stack:
            if self.time_limit is not None and time.monotonic() - start > self.time_limit:
                raise SolveTimeout(f"branch and bound exceeded {self.time_limit} s")
            if nodes >= self.node_limit:
                raise SolveTimeout(f"branch and bound exceeded {self.node_limit} nodes")
            lb, ub = stack.pop()
            nodes += 1
            res = self._relax(c, A_ub, b_ub, A_eq, b_eq, lb, ub)
            if res is None or math.ceil(res.fun - 1e-6) >= best_obj:
                continue
            x = res.x
            frac = np.abs(x - np.round(x))
            k = int(np.argmax(frac))
            if frac[k] < 1e-6:
                best_obj = round(res.fun)
                best_x = np.round(x)
                continue
            down = (lb.copy(), ub.copy())
            down[1][k] = 0
            up = (lb.copy(), ub.copy())
            up[0][k] = 1
            # explore the closer rounding first (pushed last)
            if x[k] >= 0.5:
                stack.extend([down, up])
            else:
                stack.extend([up, down])
        if best_x is None:
            return BackendResult(False, nodes=nodes)
        return BackendResult(True, [int(v) for v in best_x], int(best_obj), nodes)


BACKENDS = {"highs": HighsBackend, "bnb": BranchAndBoundBackend}


def make_backend(name: str, time_limit: float | None = None):
    try:
        return BACKENDS[name](time_limit=time_limit)
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None
