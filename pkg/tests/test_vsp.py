import random

import pytest

from densegarage.instance import BVPRInstance, Resident
from densegarage.layout import Cell, default_layout
from densegarage.validate import validate_plan
from densegarage.vsp.blocks import (
    BlockError, block_conversion, block_width, is_block_configuration, monotone_violations, slot_columns,
)
from densegarage.vsp.goals import (
    assign_goals, manhattan_lower_bound, read_schedule, spot_ranking, write_schedule,
)
from densegarage.vsp.shuffle import (
    ShuffleError, column_shuffle, column_sort, rubik_reconfigure, row_shuffle,
)


def full(lay, seed, n=None):
    rng = random.Random(seed)
    spots = sorted(lay.parking_spots)
    n = len(spots) - 1 if n is None else n
    pos = dict(enumerate(rng.sample(spots, n)))
    order = list(pos)
    rng.shuffle(order)
    return pos, order


def clean(lay, pos, plan):
    inst = BVPRInstance(lay, resident=tuple(Resident(v, c) for v, c in pos.items()))
    return validate_plan(lay, inst, plan).ok


def test_one_vehicle_gets_top_spot():
    lay = default_layout(6)
    assert assign_goals([7], lay) == {7: spot_ranking(lay)[0]}


def test_earlier_vehicle_is_closer():
    lay = default_layout(8)
    g = assign_goals([3, 9], lay)
    a, b = g[3], g[9]
    assert a.row < b.row or (a.row == b.row and min(abs(a.col - p.col) for p in lay.ports)
                             <= min(abs(b.col - p.col) for p in lay.ports))


def test_full_assignment_is_bijection():
    lay = default_layout(6)
    ranking = spot_ranking(lay)
    assert len(set(ranking)) == lay.capacity
    order = list(range(lay.capacity - 1))
    g = assign_goals(order, lay)
    assert [g[v] for v in order] == ranking[: len(order)]


def test_assign_goal_errors():
    lay = default_layout(5)
    with pytest.raises(ValueError):
        assign_goals([1, 1], lay)
    with pytest.raises(ValueError):
        assign_goals(list(range(10)), lay)
    with pytest.raises(ValueError):
        assign_goals([1, 2], lay, parked=[1, 3])


def test_schedule_file_round_trip():
    assert read_schedule(write_schedule([3, 1, 2])) == [3, 1, 2]
    with pytest.raises(ValueError):
        read_schedule('{"order": [1, "x"]}')


def test_manhattan_bound_examples():
    assert manhattan_lower_bound({0: Cell(1, 1)}, {0: Cell(1, 1)}) == 0
    assert manhattan_lower_bound({0: Cell(1, 1)}, {0: Cell(3, 4)}) == 5


def test_identity_column_shuffle_has_no_moves():
    lay = default_layout(6)
    pos = {0: Cell(1, 2), 1: Cell(2, 2), 2: Cell(4, 2)}
    res = column_shuffle(lay, pos, 2, [0, 1, None, 2])
    assert res.plan.move_count() == 0


@pytest.mark.parametrize("m1", [6, 10, 14])
def test_reversed_column_is_linear(m1):
    lay = default_layout(m1, 7)
    pos = {v: Cell(1 + v, 3) for v in range(m1 - 2)}
    res = column_shuffle(lay, pos, 3, list(reversed(range(m1 - 2))))
    assert res.plan.final() == {v: Cell(m1 - 2 - v, 3) for v in range(m1 - 2)}
    assert clean(lay, pos, res.plan)
    assert res.plan.horizon <= 3 * m1


@pytest.mark.parametrize("seed", range(10))
def test_ten_vehicle_column_permutations(seed):
    lay = default_layout(12, 7)
    pos = {v: Cell(1 + v, 3) for v in range(10)}
    target = list(range(10))
    random.Random(seed).shuffle(target)
    res = column_shuffle(lay, pos, 3, target)
    fin = res.plan.final()
    assert [v for v in sorted(fin, key=lambda v: fin[v].row)] == target
    assert all(c.col == 3 for c in fin.values())
    assert clean(lay, pos, res.plan)


def test_row_shuffle_and_helper_check():
    lay = default_layout(7, 9)
    pos = {v: Cell(3, 1 + v) for v in range(7)}
    res = row_shuffle(lay, pos, 3, [6, 5, 4, 3, 2, 1, 0])
    assert res.plan.final() == {v: Cell(3, 7 - v) for v in range(7)}
    assert clean(lay, pos, res.plan)
    with pytest.raises(ShuffleError):
        row_shuffle(lay, {**pos, 9: Cell(2, 1)}, 3, list(range(7)) + [None])


def test_rubik_identity_is_empty():
    lay = default_layout(6)
    pos, _ = full(lay, 0, 5)
    res = rubik_reconfigure(lay, pos, pos)
    assert res.plan.move_count() == 0 and res.plan.final() == pos


@pytest.mark.parametrize("seed", range(5))
def test_rubik_full_eight_by_eight(seed):
    lay = default_layout(10)
    pos, order = full(lay, seed)
    goal = assign_goals(order, lay)
    res = rubik_reconfigure(lay, pos, goal)
    assert res.plan.final() == goal
    assert res.column_shuffles + res.row_shuffles <= 2 * (lay.m2 - 2) + (lay.m1 - 2)
    assert res.plan.horizon >= manhattan_lower_bound(pos, goal)
    assert clean(lay, pos, res.plan)
    stage = res.stages[0]
    for r in range(1, lay.m1 - 1):
        cols = [goal[stage[Cell(r, c)]].col for c in range(1, lay.m2 - 1) if stage[Cell(r, c)] >= 0]
        assert len(cols) == len(set(cols))


def test_rubik_sparse_goal_cell_by_cell():
    lay = default_layout(6)
    pos = {0: Cell(1, 1), 1: Cell(4, 4), 2: Cell(2, 3), 3: Cell(3, 1)}
    goal = {0: Cell(4, 1), 1: Cell(1, 1), 2: Cell(3, 3), 3: Cell(1, 4)}
    res = rubik_reconfigure(lay, pos, goal)
    for v in goal:
        assert res.plan.final()[v] == goal[v]
    assert clean(lay, pos, res.plan)


def test_rubik_errors():
    lay = default_layout(6)
    with pytest.raises(ShuffleError):
        rubik_reconfigure(lay, {0: Cell(1, 1)}, {1: Cell(1, 1)})
    with pytest.raises(ShuffleError):
        rubik_reconfigure(lay, {0: Cell(1, 1), 1: Cell(1, 2)}, {0: Cell(2, 2), 1: Cell(2, 2)})


def test_column_sort_orders_columns():
    lay = default_layout(9)
    pos, order = full(lay, 2)
    rank = {v: k for k, v in enumerate(order)}
    res = column_sort(lay, pos, rank)
    fin = res.plan.final()
    for c in range(1, lay.m2 - 1):
        col = sorted((v for v in fin if fin[v].col == c), key=lambda v: fin[v].row)
        assert [rank[v] for v in col] == sorted(rank[v] for v in col)
        assert [fin[v].row for v in col] == list(range(1, len(col) + 1))
    assert clean(lay, pos, res.plan)


def test_block_width_and_slots():
    assert block_width(0.5) == 2 and block_width(2 / 3) == 3 and block_width(0.3) == 2
    assert slot_columns(default_layout(9), 2) == [1, 2, 4, 5, 7]
    with pytest.raises(BlockError):
        block_width(1.0)


def test_block_configuration_is_fixed_point():
    lay = default_layout(9)
    pos = {0: Cell(1, 1), 1: Cell(1, 2), 2: Cell(2, 1), 3: Cell(5, 1), 4: Cell(5, 2), 5: Cell(5, 4)}
    assert is_block_configuration(lay, pos, 2)
    res = block_conversion(lay, pos, 0.5)
    assert res.plan.move_count() == 0 and res.makespan == 0


@pytest.mark.parametrize("seed", range(6))
def test_half_full_twelve_by_twelve(seed):
    lay = default_layout(12)
    pos, _ = full(lay, seed, lay.capacity // 2)
    res = block_conversion(lay, pos, 0.5)
    assert is_block_configuration(lay, res.plan.final(), res.width)
    assert monotone_violations(pos, res) == 0
    assert res.makespan <= 2 * (lay.m1 + lay.m2)
    assert clean(lay, pos, res.plan)
    assert [p.name for p in res.phases] == ["right", "up", "down", "left"]
