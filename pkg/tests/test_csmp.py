import random

import pytest

from densegarage.csmp.mcp import DeadlockError, MCPExecutor, run_mcp, visit_entries
from densegarage.csmp.planner import (
    PriorityPolicy, concat_plan, csmp, makespan_bound, prioritize, sequential_steps, solve,
)
from densegarage.csmp.primitives import PrimitiveError, single_mp_park, single_mp_retrieve
from densegarage.csmp.state import Occupancy
from densegarage.instance import (
    BVPRInstance, ParkRequest, Resident, RetrieveRequest, densest_counts, generate_instance,
)
from densegarage.layout import Cell, default_layout, manhattan
from densegarage.metrics import compute_metrics
from densegarage.plan import plan_from_steps
from densegarage.validate import step_violations, validate_plan




def test_retrieve_without_blockers():
    lay = default_layout(7)
    occ = Occupancy({0: Cell(1, 3)})
    prim = single_mp_retrieve(occ, lay, 0, Cell(0, 5))
    assert prim.blockers == 0
    plan = plan_from_steps(occ.pos, prim.steps)
    assert plan.paths[0] == [Cell(1, 3), Cell(0, 3), Cell(0, 4), Cell(0, 5)]


def test_retrieve_with_three_blockers():
    lay = default_layout(8)
    c, port = 3, Cell(0, 5)
    pos = {0: Cell(4, c), 1: Cell(3, c), 2: Cell(2, c), 3: Cell(1, c)}
    occ = Occupancy(pos)
    prim = single_mp_retrieve(occ, lay, 0, port)
    assert prim.blockers == 3
    plan = plan_from_steps(pos, prim.steps)
    target_moves = sum(1 for a, b in zip(plan.paths[0], plan.paths[0][1:]) if a != b)
    assert target_moves == manhattan(pos[0], port)
    shifts = [s for s in prim.steps[:3]]
    assert all(len(s) == 1 and 0 not in s for s in shifts)  # one row convoy per timestep
    inst = BVPRInstance(lay, retrieve=(RetrieveRequest(0, pos[0], port),),
                        resident=tuple(Resident(v, pos[v]) for v in (1, 2, 3)))
    assert validate_plan(lay, inst, plan).ok


@pytest.mark.parametrize("seed", range(10))
def test_retrieve_at_full_density(seed):
    lay = default_layout(7)
    rng = random.Random(seed)
    spots = sorted(lay.parking_spots)
    cells = rng.sample(spots, len(spots) - 1)
    pos = dict(enumerate(cells))
    port = rng.choice(lay.ports)
    inst = BVPRInstance(lay, retrieve=(RetrieveRequest(0, pos[0], port),),
                        resident=tuple(Resident(v, c) for v, c in pos.items() if v))
    prim = single_mp_retrieve(Occupancy(pos), lay, 0, port)
    assert validate_plan(lay, inst, plan_from_steps(pos, prim.steps)).ok


def test_retrieve_errors():
    lay = default_layout(6)
    occ = Occupancy({0: Cell(2, 2)})
    with pytest.raises(PrimitiveError):
        single_mp_retrieve(occ, lay, 0, Cell(1, 1))
    with pytest.raises(PrimitiveError):
        single_mp_retrieve(occ, lay, 5, Cell(0, 1))


def test_park_with_escort_below():
    lay = default_layout(6)
    occ = Occupancy({0: Cell(0, 2)})
    prim = single_mp_park(occ, lay, 0, Cell(0, 2))
    assert prim.steps == [{0: Cell(1, 2)}]


def test_park_two_convoy_steps_then_vehicle():
    lay = default_layout(6)
    spots = sorted(lay.parking_spots)
    escort = Cell(3, 4)
    pos = {0: Cell(0, 2)}
    pos.update({i + 1: c for i, c in enumerate(c for c in spots if c != escort)})
    prim = single_mp_park(Occupancy(pos), lay, 0, Cell(0, 2))
    assert len(prim.steps) == 3
    assert all(0 not in s for s in prim.steps[:2]) and prim.steps[2] == {0: Cell(1, 2)}
    # concurrent execution needs only two timesteps
    executed = run_mcp(pos, prim.steps)
    assert len(executed) == 2


def test_park_with_one_escort_anywhere():
    lay = default_layout(6)
    spots = sorted(lay.parking_spots)
    for escort in spots:
        for port in lay.ports:
            pos = {0: port}
            pos.update({i + 1: c for i, c in enumerate(c for c in spots if c != escort)})
            prim = single_mp_park(Occupancy(pos), lay, 0, port)
            plan = plan_from_steps(pos, prim.steps)
            for t in range(plan.horizon):
                cur = {v: p[t] for v, p in plan.paths.items()}
                nxt = {v: p[t + 1] for v, p in plan.paths.items()}
                assert step_violations(t, cur, nxt, lay) == []
            assert lay.is_parking(plan.paths[0][-1])


def test_park_without_escort_fails():
    lay = default_layout(4)
    with pytest.raises(PrimitiveError):
        single_mp_park(Occupancy({0: Cell(0, 1), 1: Cell(1, 1), 2: Cell(1, 2), 3: Cell(2, 1), 4: Cell(2, 2)}),
                       lay, 0, Cell(0, 1))


def test_mcp_front_moves_and_others_wait():
    ex = MCPExecutor(Occupancy({0: Cell(1, 1), 1: Cell(1, 3)}))
    ex.add_timeline([(0, Cell(1, 2)), (1, Cell(1, 2))])
    assert ex.step() == {0: Cell(1, 2)}
    assert ex.order.front(Cell(1, 2)) == 1


def test_mcp_convoy_moves_together():
    ex = MCPExecutor(Occupancy({0: Cell(2, 1), 1: Cell(2, 2)}))
    ex.add_timeline([(1, Cell(2, 3)), (0, Cell(2, 2))])
    assert ex.step() == {1: Cell(2, 3), 0: Cell(2, 2)}


def test_mcp_refuses_perpendicular_follow():
    ex = MCPExecutor(Occupancy({0: Cell(2, 1), 1: Cell(2, 2)}))
    ex.add_timeline([(1, Cell(1, 2)), (0, Cell(2, 2))])
    assert ex.step() == {1: Cell(1, 2)}
    assert ex.step() == {0: Cell(2, 2)}


def test_mcp_cycle_waits():
    start = {0: Cell(1, 1), 1: Cell(1, 2)}
    with pytest.raises(DeadlockError):
        run_mcp(start, [{0: Cell(1, 2), 1: Cell(1, 1)}])


def test_visit_entries_skip_noops():
    start = {0: Cell(1, 1), 1: Cell(1, 2)}
    assert visit_entries(start, [{0: Cell(1, 1), 1: Cell(2, 2)}]) == [(1, Cell(2, 2))]


def test_concat_single_task_equals_primitive():
    lay = default_layout(7)
    inst = generate_instance(lay, 0, 1, 10, 3)
    prim = single_mp_retrieve(Occupancy(inst.starts), lay, inst.retrieve[0].vehicle, inst.retrieve[0].goal)
    assert concat_plan(inst, inst.tasked).paths == plan_from_steps(inst.starts, prim.steps).paths


def test_concat_two_retrievals_is_sum_of_spans():
    lay = default_layout(8)
    inst = BVPRInstance(lay, retrieve=(RetrieveRequest(0, Cell(2, 2), Cell(0, 1)),
                                       RetrieveRequest(1, Cell(3, 5), Cell(0, 6))))
    steps, ends = sequential_steps(inst, [0, 1])
    assert compute_metrics(inst, concat_plan(inst, [0, 1])).mkpn == len(steps) == ends[1]
    assert ends[0] == manhattan(Cell(2, 2), Cell(0, 1))


def test_csmp_single_task_equals_primitive_without_waits():
    lay = default_layout(7)
    inst = generate_instance(lay, 0, 1, 12, 5)
    a = concat_plan(inst, inst.tasked).trimmed()
    b = csmp(inst).trimmed()
    assert compute_metrics(inst, b).mkpn <= compute_metrics(inst, a).mkpn
    assert a.final() == b.final()


@pytest.mark.parametrize("seed", range(5))
def test_densest_eight_by_eight_bound(seed):
    lay = default_layout(8)
    inst = generate_instance(lay, *densest_counts(lay), seed)
    for planner in ("rcsmp", "pcsmp"):
        plan = solve(inst, planner, seed)
        assert validate_plan(lay, inst, plan).ok
        assert compute_metrics(inst, plan).mkpn <= makespan_bound(inst)


def test_prioritize_rules():
    lay = default_layout(8)
    inst = BVPRInstance(
        lay,
        park=(ParkRequest(3, Cell(0, 5)), ParkRequest(0, Cell(0, 6))),
        retrieve=(RetrieveRequest(1, Cell(4, 2), Cell(0, 2)), RetrieveRequest(2, Cell(1, 4), Cell(0, 4))),
    )
    assert prioritize(inst) == [0, 3, 2, 1]
    same = BVPRInstance(lay, retrieve=(RetrieveRequest(0, Cell(4, 3), Cell(0, 3)),
                                       RetrieveRequest(1, Cell(1, 3), Cell(0, 2))))
    assert prioritize(same)[0] == 1
    tie = BVPRInstance(lay, retrieve=(RetrieveRequest(1, Cell(2, 1), Cell(0, 1)),
                                      RetrieveRequest(0, Cell(2, 6), Cell(0, 6))))
    assert prioritize(tie) == [0, 1]


def test_prioritize_defers_retrievals_whose_port_others_pass():
    lay = default_layout(10)
    # vehicle 0 is nearest, but delivering it first would block vehicle 1's row-0 route
    inst = BVPRInstance(lay, retrieve=(RetrieveRequest(0, Cell(1, 4), Cell(0, 4)),
                                       RetrieveRequest(1, Cell(2, 2), Cell(0, 6))))
    assert prioritize(inst) == [1, 0]


def test_pcsmp_not_worse_than_rcsmp_on_most_seeds():
    lay = default_layout(20)
    wins = 0
    for seed in range(20):
        inst = generate_instance(lay, *densest_counts(lay), seed)
        p = compute_metrics(inst, solve(inst, "pcsmp", seed)).mkpn
        r = compute_metrics(inst, solve(inst, "rcsmp", seed)).mkpn
        wins += p <= r
    assert wins >= 14


def test_policy_errors():
    inst = generate_instance(default_layout(6), 1, 1, 2, 0)
    with pytest.raises(ValueError):
        PriorityPolicy("fifo").order(inst)
    with pytest.raises(ValueError):
        solve(inst, "astar")
    with pytest.raises(ValueError):
        sequential_steps(inst, [0])
