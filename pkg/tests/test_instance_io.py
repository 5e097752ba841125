import json

import pytest

from densegarage.instance import (
    BVPRInstance, InstanceError, ParkRequest, Resident, RetrieveRequest, densest_counts,
    generate_instance,
)
from densegarage.io import (
    FormatError, deserialize_instance, deserialize_plan, serialize_instance, serialize_plan,
)
from densegarage.layout import Cell, default_layout
from densegarage.plan import Plan


def test_empty_instance():
    inst = generate_instance(default_layout(6), 0, 0, 0, 3)
    assert inst.n_vehicles == 0 and inst.tasked == []


def test_densest_setting_accepted():
    lay = default_layout(8)
    n_p, n_r, n_l = densest_counts(lay)
    assert n_p + n_r == lay.n_ports
    assert n_p + n_r + n_l == lay.capacity - 1
    inst = generate_instance(lay, n_p, n_r, n_l, 0)
    assert inst.n_vehicles == 35


def test_same_seed_same_instance():
    lay = default_layout(10)
    assert generate_instance(lay, 3, 4, 20, 9) == generate_instance(lay, 3, 4, 20, 9)
    assert generate_instance(lay, 3, 4, 20, 9) != generate_instance(lay, 3, 4, 20, 10)


def test_instance_errors():
    lay = default_layout(5)
    with pytest.raises(InstanceError):
        generate_instance(lay, 2, 2, 0, 0)  # more tasks than ports
    with pytest.raises(InstanceError):
        generate_instance(lay, 0, 0, 9, 0)  # fills every spot
    with pytest.raises(InstanceError):
        BVPRInstance(lay, (ParkRequest(0, Cell(2, 2)),))
    with pytest.raises(InstanceError):
        BVPRInstance(lay, (ParkRequest(0, Cell(0, 1)),), (RetrieveRequest(1, Cell(2, 2), Cell(0, 1)),))
    with pytest.raises(InstanceError):
        BVPRInstance(lay, resident=(Resident(0, Cell(1, 1)), Resident(1, Cell(1, 1))))
    with pytest.raises(InstanceError):
        BVPRInstance(lay, resident=(Resident(1, Cell(1, 1)),))


def test_instance_round_trip():
    inst = generate_instance(default_layout(9), 2, 3, 10, 4)
    assert deserialize_instance(serialize_instance(inst)) == inst


def test_plan_round_trip():
    plan = Plan({0: [Cell(1, 1), Cell(0, 1)], 1: [Cell(2, 2)]})
    back = deserialize_plan(serialize_plan(plan))
    assert back == plan and back.horizon == 1


def test_empty_plan_document():
    assert deserialize_plan("").horizon == 0
    assert deserialize_plan("vehicle,t,row,col\n").horizon == 0


@pytest.mark.parametrize(
    "text,needle",
    [
        ("{", "invalid JSON at line 1"),
        (json.dumps({"m2": 5, "ports": [1]}), "missing field 'm1'"),
        (json.dumps({"m1": "5", "m2": 5, "ports": [1]}), "'m1' must be an integer"),
        (json.dumps({"m1": 5, "m2": 5, "ports": [9]}), "bad layout"),
        (json.dumps({"m1": 5, "m2": 5, "ports": [1], "park": [{"id": 0}]}), "park[0]: missing field 'port_col'"),
    ],
)
def test_instance_diagnostics(text, needle):
    with pytest.raises(FormatError) as err:
        deserialize_instance(text)
    assert needle in str(err.value)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("v,t,r,c\n", "line 1: expected header"),
        ("vehicle,t,row,col\n0,0,1\n", "line 2: expected 4 fields"),
        ("vehicle,t,row,col\n0,0,1,x\n", "line 2: non-integer"),
        ("vehicle,t,row,col\n0,1,1,1\n", "line 2: vehicle 0 timestep 1 out of order"),
    ],
)
def test_plan_diagnostics(text, needle):
    with pytest.raises(FormatError) as err:
        deserialize_plan(text)
    assert needle in str(err.value)
