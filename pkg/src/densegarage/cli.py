"""Command-line front end: generate, solve, validate, simulate, shuffle, bench.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 timeouts only.
"""

from __future__ import annotations

import argparse
import csv
import io
import multiprocessing as mp
import os
import random
import statistics
import sys
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .csmp.planner import PLANNERS, solve as csmp_solve
from .ilp.backends import BACKENDS, SolveTimeout, make_backend
from .ilp.program import write_lp
from .ilp.solver import HorizonExhausted, SolveStats, solve_bvpr_optimal
from .instance import BVPRInstance, InstanceError, Resident, densest_counts, generate_instance
from .io import FormatError, deserialize_instance, deserialize_plan, serialize_instance, serialize_plan
from .layout import GarageLayout, LayoutError, build_layout
from .metrics import compute_metrics
from .plan import Plan, PlanError
from .sim.model import PRESETS, ScenarioConfig
from .sim.simulator import retrieve_all, run_scenario, stats_csv, trace_csv
from .validate import validate_plan
from .vsp.goals import assign_goals, read_schedule
from .vsp.shuffle import ShuffleError, column_sort, rubik_reconfigure

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_TIMEOUT = 0, 1, 2, 3
SOLVERS = ("ilp",) + PLANNERS


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> List[int]:
    """``"6..14"`` (every integer), ``"6..14:2"`` (stepped) or ``"10,20,30"``."""
    text = text.strip()
    try:
        if ".." in text:
            rng, _, step = text.partition(":")
            lo, hi = (int(x) for x in rng.split(".."))
            st = int(step) if step else 1
            if st < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, st))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def parse_densities(text: str) -> List[Optional[float]]:
    out: List[Optional[float]] = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok == "max":
            out.append(None)
            continue
        try:
            d = float(tok)
        except ValueError:
            raise UsageError(f"bad density {tok!r}") from None
        if not 0 < d <= 1:
            raise UsageError(f"density {d} outside (0, 1]")
        out.append(d)
    return out


def make_layout(m1: int, m2: Optional[int], ports: Optional[str]) -> GarageLayout:
    m2 = m1 if m2 is None else m2
    cols = list(range(1, m2 - 1)) if ports is None else parse_int_list(ports)
    try:
        return build_layout(m1, m2, cols)
    except LayoutError as exc:
        raise UsageError(str(exc)) from None


def density_counts(layout: GarageLayout, density: Optional[float]) -> Tuple[int, int, int]:
    """Densest task split with ``density`` of the parking spots occupied overall."""
    n_p, n_r, n_l = densest_counts(layout)
    if density is not None:
        n = min(round(density * layout.capacity), layout.capacity - 1)
        n_l = max(n - n_p - n_r, 0)
    return n_p, n_r, n_l


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str, append: bool = False) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "a" if append else "w") as fh:
        fh.write(text)


def plan_instance(
    inst: BVPRInstance,
    planner: str,
    seed: int = 0,
    timeout_s: float = 60.0,
    backend: str = "highs",
    on_program=None,
) -> Tuple[Plan, Optional[SolveStats]]:
    if planner == "ilp":
        return solve_bvpr_optimal(
            inst, backend=make_backend(backend), on_program=on_program, time_limit=timeout_s
        )
    if planner not in PLANNERS:
        raise UsageError(f"unknown planner {planner!r}")
    return csmp_solve(inst, planner, seed), None


def cmd_gen(args) -> int:
    lay = make_layout(args.m1, args.m2, args.ports)
    n_p, n_r, n_l = densest_counts(lay)
    n_p = n_p if args.np is None else args.np
    n_r = n_r if args.nr is None else args.nr
    n_l = (lay.capacity - 1 - n_p - n_r) if args.nl is None else args.nl
    try:
        inst = generate_instance(lay, n_p, n_r, n_l, args.seed)
    except InstanceError as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, serialize_instance(inst))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    dump = None
    if args.lp_dump:
        if args.planner != "ilp":
            raise UsageError("--lp-dump only applies to --planner ilp")
        dump = lambda T, prog: _write(args.lp_dump, write_lp(prog))
    t0 = time.monotonic()
    try:
        plan, stats = plan_instance(inst, args.planner, args.seed, args.timeout_s, args.backend, dump)
    except SolveTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except HorizonExhausted as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INVALID
    runtime_ms = (time.monotonic() - t0) * 1000.0
    report = validate_plan(inst.layout, inst, plan)
    if not report.ok:
        print(f"internal error: planner produced an invalid plan ({report.summary()})", file=sys.stderr)
        return EXIT_INVALID
    _write(args.out, serialize_plan(plan))
    if stats is not None:
        line = dict(zip(SolveStats.CSV_FIELDS, stats.csv_row()))
    else:
        line = {"runtime_ms": f"{runtime_ms:.1f}"}
    if inst.tasked:
        m = compute_metrics(inst, plan)
        line.update(mkpn=str(m.mkpn), aprt=f"{m.aprt:.3f}", anm=f"{m.anm:.3f}")
    print(" ".join(f"{k}={v}" for k, v in line.items()), file=sys.stderr)
    return EXIT_OK


def _load_instance(path: str) -> BVPRInstance:
    try:
        return deserialize_instance(_read(path))
    except FormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    try:
        plan = deserialize_plan(_read(args.plan))
        report = validate_plan(inst.layout, inst, plan)
    except (FormatError, PlanError) as exc:
        print(f"invalid plan: {exc}")
        return EXIT_INVALID
    print(report.summary())
    for v in report.violations:
        print(f"  {v.kind} t={v.t} vehicles={','.join(map(str, v.vehicles))}")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_simulate(args) -> int:
    if args.config:
        try:
            cfg = ScenarioConfig.from_json(_read(args.config))
        except (ValueError, TypeError) as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    else:
        cfg = ScenarioConfig.from_preset(args.scenario, args.m1, args.m2 or args.m1, None, args.seed)
        if args.ports:
            cfg.ports = parse_int_list(args.ports)
        if args.pp is not None:
            cfg.p_p = args.pp
        if args.pr is not None:
            cfg.p_r = args.pr
        if args.horizon is not None:
            cfg.horizon = args.horizon
    try:
        lay = cfg.layout()
        preset = cfg.preset
    except (LayoutError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for k in range(args.runs):
        trace: Optional[list] = [] if args.trace and k == 0 else None
        rows.append(run_scenario(preset, lay, cfg.seed + k, trace))
        if trace is not None:
            _write(args.trace, trace_csv(trace))
    _write(args.out, stats_csv(rows))
    return EXIT_OK


def _random_full(layout: GarageLayout, seed: int):
    rng = random.Random(seed)
    spots = sorted(layout.parking_spots)
    pos = {v: c for v, c in enumerate(rng.sample(spots, len(spots) - 1))}
    order = list(pos)
    rng.shuffle(order)
    return pos, order


def cmd_shuffle(args) -> int:
    lay = make_layout(args.m1, args.m2, args.ports)
    out_rows = []
    compare = []
    for k in range(args.runs):
        seed = args.seed + k
        pos, order = _random_full(lay, seed)
        if args.schedule:
            try:
                order = read_schedule(_read(args.schedule))
                assign_goals(order, lay, list(pos))
            except ValueError as exc:
                raise UsageError(f"{args.schedule}: {exc}") from None
        t0 = time.monotonic()
        try:
            if args.mode == "column":
                res = column_sort(lay, pos, {v: i for i, v in enumerate(order)})
            else:
                res = rubik_reconfigure(lay, pos, assign_goals(order, lay))
        except ShuffleError as exc:
            raise UsageError(str(exc)) from None
        ms = (time.monotonic() - t0) * 1000.0
        inst = BVPRInstance(lay, resident=_residents(pos))
        report = validate_plan(lay, inst, res.plan)
        if not report.ok:
            print(f"internal error: shuffle plan invalid ({report.summary()})", file=sys.stderr)
            return EXIT_INVALID
        out_rows.extend((seed,) + r for r in res.report_rows())
        line = f"seed={seed} makespan={res.plan.horizon} moves={res.plan.move_count()} runtime_ms={ms:.1f}"
        if args.compare:
            base = retrieve_all(lay, dict(pos), order)
            after = retrieve_all(lay, res.plan.final(), order)
            compare.append((seed, _mean_latency(base), base.total_moves, _mean_latency(after), after.total_moves))
            line += f" retrieve_all moves {base.total_moves}->{after.total_moves}"
        print(line, file=sys.stderr)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("seed", "phase", "kind", "line", "makespan", "moves"))
    w.writerows(out_rows)
    _write(args.out, buf.getvalue())
    if args.compare_out and compare:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("seed", "unshuffled_retrieval_time", "unshuffled_moves",
                    "shuffled_retrieval_time", "shuffled_moves"))
        w.writerows((s, f"{a:.3f}", b, f"{c:.3f}", d) for s, a, b, c, d in compare)
        _write(args.compare_out, buf.getvalue())
    return EXIT_OK


def _residents(pos):
    return tuple(Resident(v, c) for v, c in sorted(pos.items()))


def _mean_latency(state) -> float:
    lat = [t.latency for t in state.finished]
    return statistics.mean(lat) if lat else 0.0


@dataclass
class BenchSpec:
    axis: str
    values: List
    solvers: List[str]
    repetitions: int = 20
    seed: int = 0
    timeout_s: float = 60.0
    m: int = 20
    backend: str = "highs"

    def __post_init__(self) -> None:
        if self.axis not in ("size", "density"):
            raise UsageError(f"unknown sweep axis {self.axis!r}")
        if self.repetitions < 1:
            raise UsageError("repetitions must be at least 1")
        if self.timeout_s <= 0:
            raise UsageError("timeout must be positive")
        bad = [s for s in self.solvers if s not in SOLVERS]
        if bad:
            raise UsageError(f"unknown solvers {bad}; choose from {list(SOLVERS)}")


@dataclass
class BenchRow:
    solver: str
    m1: int
    m2: int
    density: float
    seed: int
    runtime_ms: float
    mkpn: Optional[int] = None
    aprt: Optional[float] = None
    anm: Optional[float] = None
    status: str = "ok"

    CSV_FIELDS = ("solver", "m1", "m2", "density", "seed", "runtime_ms", "mkpn", "aprt", "anm", "status")

    def csv_row(self) -> List[str]:
        fmt = lambda x, spec: "" if x is None else format(x, spec)
        return [self.solver, str(self.m1), str(self.m2), f"{self.density:.4f}", str(self.seed),
                f"{self.runtime_ms:.1f}", fmt(self.mkpn, "d"), fmt(self.aprt, ".4f"),
                fmt(self.anm, ".4f"), self.status]


class InvalidPlan(RuntimeError):
    pass


def _solve_row(inst: BVPRInstance, solver: str, seed: int, timeout_s: float, backend: str):
    """Plan, validate, measure; returns ``(status, runtime_ms, metrics)``."""
    t0 = time.monotonic()
    try:
        plan, _ = plan_instance(inst, solver, seed, timeout_s, backend)
    except SolveTimeout:
        return "timeout", (time.monotonic() - t0) * 1000.0, None
    except HorizonExhausted:
        return "infeasible", (time.monotonic() - t0) * 1000.0, None
    ms = (time.monotonic() - t0) * 1000.0
    if ms > timeout_s * 1000.0:
        return "timeout", ms, None
    report = validate_plan(inst.layout, inst, plan)
    if not report.ok:
        raise InvalidPlan(f"{solver} seed {seed}: {report.summary()}")
    return "ok", ms, compute_metrics(inst, plan)


def _child(conn, *args) -> None:
    try:
        conn.send(("done", _solve_row(*args)))
    except InvalidPlan as exc:
        conn.send(("invalid", str(exc)))


def _solve_isolated(inst, solver, seed, timeout_s, backend):
    """Run an exact solve in a child process so model building is also bounded."""
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    recv, send = ctx.Pipe(duplex=False)
    proc = ctx.Process(target=_child, args=(send, inst, solver, seed, timeout_s, backend))
    t0 = time.monotonic()
    proc.start()
    send.close()
    ready = recv.poll(timeout_s + 5.0)
    if not ready:
        proc.kill()
        proc.join()
        return "timeout", (time.monotonic() - t0) * 1000.0, None
    kind, payload = recv.recv()
    proc.join()
    if kind == "invalid":
        raise InvalidPlan(payload)
    return payload


def run_bench(spec: BenchSpec, emit: Callable[[BenchRow], None]) -> Dict[str, int]:
    """Execute every (point, repetition, solver) row; seeds are master seed + repetition."""
    counts = {"ok": 0, "timeout": 0, "infeasible": 0}
    for value in spec.values:
        if spec.axis == "size":
            lay = make_layout(value, value, None)
            density = None
        else:
            lay = make_layout(spec.m, spec.m, None)
            density = value
        n_p, n_r, n_l = density_counts(lay, density)
        for rep in range(spec.repetitions):
            seed = spec.seed + rep
            inst = generate_instance(lay, n_p, n_r, n_l, seed)
            for solver in spec.solvers:
                if solver == "ilp":
                    status, ms, m = _solve_isolated(inst, solver, seed, spec.timeout_s, spec.backend)
                else:
                    status, ms, m = _solve_row(inst, solver, seed, spec.timeout_s, spec.backend)
                counts[status] += 1
                emit(BenchRow(
                    solver, lay.m1, lay.m2, inst.n_vehicles / lay.capacity, seed, ms,
                    m.mkpn if m else None, m.aprt if m else None, m.anm if m else None, status,
                ))
    return counts


def plot_bench(csv_text: str, path: str, axis: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(csv.DictReader(io.StringIO(csv_text)))
    key = "m1" if axis == "size" else "density"
    metrics = ("runtime_ms", "mkpn", "aprt", "anm")
    fig, axes = plt.subplots(1, len(metrics), figsize=(4 * len(metrics), 3.2))
    for solver in sorted({r["solver"] for r in rows}):
        groups: Dict[float, Dict[str, List[float]]] = {}
        for r in rows:
            if r["solver"] != solver or r["status"] != "ok":
                continue
            g = groups.setdefault(round(float(r[key]), 2), {k: [] for k in metrics})
            for k in metrics:
                g[k].append(float(r[k]))
        xs = sorted(groups)
        for ax, k in zip(axes, metrics):
            ax.plot(xs, [statistics.mean(groups[x][k]) for x in xs], marker="o", label=solver)
    for ax, k in zip(axes, metrics):
        ax.set_title(k)
        ax.set_xlabel("m" if axis == "size" else "density")
    axes[0].set_yscale("log")
    axes[-1].legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_bench(args) -> int:
    if args.sweep == "size":
        values = parse_int_list(args.sizes or "10,20,30")
    else:
        values = parse_densities(args.densities)
    solvers = [s.strip() for s in args.planners.split(",") if s.strip()]
    spec = BenchSpec(args.sweep, values, solvers, args.runs, args.seed, args.timeout_s, args.m1, args.backend)
    append = bool(args.out) and args.out != "-" and os.path.exists(args.out) and os.path.getsize(args.out) > 0
    header = ",".join(BenchRow.CSV_FIELDS) + "\n"
    collected = io.StringIO()
    collected.write(header)
    if not append:
        _write(args.out, header)

    def emit(row: BenchRow) -> None:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(row.csv_row())
        collected.write(buf.getvalue())
        _write(args.out, buf.getvalue(), append=bool(args.out) and args.out != "-")

    try:
        counts = run_bench(spec, emit)
    except InvalidPlan as exc:
        print(f"internal error: invalid plan in sweep: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.plot:
        plot_bench(collected.getvalue(), args.plot, args.sweep)
    print(" ".join(f"{k}={v}" for k, v in counts.items()), file=sys.stderr)
    return EXIT_TIMEOUT if counts["timeout"] else EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="densegarage", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def grid(sp, m1: int = 10) -> None:
        sp.add_argument("--m1", type=int, default=m1, help="grid rows")
        sp.add_argument("--m2", type=int, default=None, help="grid columns (default: m1)")
        sp.add_argument("--ports", default=None, help="port columns, e.g. 1,3,5 or 1..8 (default: all interior)")

    sp = sub.add_parser("gen", help="generate a random instance")
    grid(sp)
    sp.add_argument("--np", type=int, default=None, help="parking requests (default: densest split)")
    sp.add_argument("--nr", type=int, default=None, help="retrieval requests (default: densest split)")
    sp.add_argument("--nl", type=int, default=None, help="resident vehicles (default: fill to capacity-1)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="plan an instance")
    sp.add_argument("instance")
    sp.add_argument("--planner", choices=SOLVERS, default="pcsmp")
    sp.add_argument("--backend", choices=sorted(BACKENDS), default="highs")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timeout-s", type=float, default=60.0)
    sp.add_argument("--lp-dump", default=None, help="write the final ILP in LP format")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("validate", help="check a plan against an instance")
    sp.add_argument("instance")
    sp.add_argument("plan")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("simulate", help="run a continuous parking/retrieval scenario")
    grid(sp, 12)
    sp.add_argument("--scenario", choices=sorted(PRESETS), default="workday")
    sp.add_argument("--config", default=None, help="scenario JSON (overrides the other flags)")
    sp.add_argument("--pp", type=float, default=None)
    sp.add_argument("--pr", type=float, default=None)
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--runs", type=int, default=1, help="seeds seed..seed+runs-1")
    sp.add_argument("--trace", default=None, help="per-move trace CSV of the first run")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("shuffle", help="reorder a full garage by retrieval schedule")
    grid(sp)
    sp.add_argument("--mode", choices=("rubik", "column"), default="column")
    sp.add_argument("--schedule", default=None, help="JSON {\"order\": [...]} (default: random)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--compare", action="store_true", help="retrieve-all with and without shuffling")
    sp.add_argument("--compare-out", default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_shuffle)

    sp = sub.add_parser("bench", help="benchmark sweep to CSV")
    sp.add_argument("--sweep", choices=("size", "density"), default="size")
    sp.add_argument("--sizes", default=None, help="grid sides, e.g. 6..14 or 10,20,30")
    sp.add_argument("--densities", default="0.2,0.5,0.8,max")
    sp.add_argument("--m1", type=int, default=20, help="grid side for density sweeps")
    sp.add_argument("--planners", default="concat,rcsmp,pcsmp")
    sp.add_argument("--planner", dest="planners", help="single planner (alias)")
    sp.add_argument("--backend", choices=sorted(BACKENDS), default="highs")
    sp.add_argument("--runs", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timeout-s", type=float, default=60.0)
    sp.add_argument("--plot", default=None, help="render a PNG summary (needs matplotlib)")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
