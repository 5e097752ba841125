import random

import pytest

from densegarage.csmp.planner import solve
from densegarage.instance import BVPRInstance, ParkRequest, Resident, RetrieveRequest, generate_instance
from densegarage.layout import Cell, default_layout
from densegarage.metrics import MetricsUndefined, compute_metrics
from densegarage.plan import Plan, PlanError
from densegarage.validate import validate_plan
from oracles import brute_force_violations

LAY = default_layout(6)


def residents(*cells):
    return BVPRInstance(LAY, resident=tuple(Resident(i, Cell(*c)) for i, c in enumerate(cells)))


def report(cells, paths):
    return validate_plan(LAY, residents(*cells), Plan({i: [Cell(*c) for c in p] for i, p in enumerate(paths)}))


def test_single_vehicle_is_ok():
    assert report([(2, 1)], [[(2, 1), (2, 2)]]).ok


def test_head_on():
    rep = report([(1, 1), (1, 2)], [[(1, 1), (1, 2)], [(1, 2), (1, 1)]])
    assert rep.count("head-on") == 1


def test_perpendicular_following():
    rep = report([(2, 1), (2, 2)], [[(2, 1), (2, 2)], [(2, 2), (1, 2)]])
    assert rep.count("perp-follow") == 1


def test_convoy_is_legal():
    assert report([(2, 1), (2, 2)], [[(2, 1), (2, 2)], [(2, 2), (2, 3)]]).ok


def test_meet_and_discontinuity():
    rep = report([(1, 1), (1, 3)], [[(1, 1), (1, 2)], [(1, 3), (1, 2)]])
    assert rep.count("meet") == 1
    rep = report([(1, 1)], [[(1, 1), (3, 3)]])
    assert rep.count("discontinuity") == 1


def test_goal_miss_and_all_violations_reported():
    inst = BVPRInstance(LAY, retrieve=(RetrieveRequest(0, Cell(1, 1), Cell(0, 1)),),
                        resident=(Resident(1, Cell(1, 2)), Resident(2, Cell(1, 3))))
    plan = Plan({0: [Cell(1, 1), Cell(1, 2)], 1: [Cell(1, 2), Cell(1, 1)], 2: [Cell(1, 3), Cell(0, 3)]})
    rep = validate_plan(LAY, inst, plan)
    assert rep.count("head-on") == 1 and rep.count("goal-miss") == 2


def test_path_set_mismatch():
    with pytest.raises(PlanError):
        validate_plan(LAY, residents((1, 1)), Plan({}))


def test_validator_agrees_with_brute_force():
    rng = random.Random(5)
    compared = 0
    for _ in range(1500):
        cells = rng.sample(sorted(LAY.parking_spots), 4)
        paths = {}
        for i, c in enumerate(cells):
            p = [c]
            for _ in range(4):
                nb = list(LAY.neighbors(p[-1])) + [p[-1]]
                p.append(rng.choice(nb))
            paths[i] = p
        rep = validate_plan(LAY, residents(*cells), Plan(paths))
        ref = brute_force_violations(paths)
        assert (rep.count("meet") > 0) == (ref["meet"] > 0)
        if ref["meet"]:
            continue  # once two vehicles share a cell, later pair checks are ambiguous
        compared += 1
        for kind in ("head-on", "perp-follow"):
            assert rep.count(kind) == ref[kind], (kind, paths)
    assert compared > 100


def test_metrics_definition():
    inst = BVPRInstance(LAY, retrieve=(RetrieveRequest(0, Cell(3, 1), Cell(0, 1)),
                                       RetrieveRequest(1, Cell(4, 2), Cell(0, 2))))
    plan = Plan({
        0: [Cell(3, 1), Cell(2, 1), Cell(1, 1), Cell(0, 1)],
        1: [Cell(4, 2), Cell(3, 2), Cell(2, 2), Cell(2, 2), Cell(1, 2), Cell(0, 2)],
    })
    m = compute_metrics(inst, plan)
    assert (m.mkpn, m.aprt, m.anm) == (5, 4.0, 3.5)


def test_metrics_nobody_moves():
    inst = BVPRInstance(LAY, park=(ParkRequest(0, Cell(0, 1)),))
    m = compute_metrics(inst, Plan({0: [Cell(0, 1)]}))
    assert (m.mkpn, m.aprt, m.anm) == (0, 0, 0)


def test_metrics_undefined_without_tasks():
    with pytest.raises(MetricsUndefined):
        compute_metrics(residents((1, 1)), Plan({0: [Cell(1, 1)]}))


def test_anm_recount():
    inst = generate_instance(LAY, 2, 2, 8, 1)
    plan = solve(inst, "pcsmp")
    raw = sum(1 for p in plan.paths.values() for a, b in zip(p, p[1:]) if a != b)
    assert compute_metrics(inst, plan).anm == raw / 4
