"""On-disk formats: JSON instances and ``vehicle,t,row,col`` CSV plans."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Dict, List

from .instance import BVPRInstance, InstanceError, ParkRequest, Resident, RetrieveRequest
from .layout import Cell, LayoutError, build_layout
from .plan import Plan


class FormatError(ValueError):
    pass


def instance_to_dict(inst: BVPRInstance) -> Dict[str, Any]:
    lay = inst.layout
    return {
        "m1": lay.m1,
        "m2": lay.m2,
        "ports": lay.port_cols,
        "park": [{"id": p.vehicle, "port_col": p.port.col} for p in inst.park],
        "retrieve": [
            {"id": r.vehicle, "row": r.start.row, "col": r.start.col, "goal_port_col": r.goal.col}
            for r in inst.retrieve
        ],
        "resident": [{"id": l.vehicle, "row": l.spot.row, "col": l.spot.col} for l in inst.resident],
    }


def _field(obj: Dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(obj, dict):
        raise FormatError(f"{where}: expected an object, got {type(obj).__name__}")
    if key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    return obj[key]


def _int(obj: Dict[str, Any], key: str, where: str) -> int:
    val = _field(obj, key, where)
    if isinstance(val, bool) or not isinstance(val, int):
        raise FormatError(f"{where}: field {key!r} must be an integer, got {val!r}")
    return val


def instance_from_dict(doc: Dict[str, Any]) -> BVPRInstance:
    m1 = _int(doc, "m1", "instance")
    m2 = _int(doc, "m2", "instance")
    ports = _field(doc, "ports", "instance")
    if not isinstance(ports, list):
        raise FormatError("instance: 'ports' must be a list of columns")
    try:
        layout = build_layout(m1, m2, ports)
    except LayoutError as exc:
        raise FormatError(f"instance: bad layout: {exc}") from exc
    park = tuple(
        ParkRequest(_int(e, "id", f"park[{k}]"), Cell(0, _int(e, "port_col", f"park[{k}]")))
        for k, e in enumerate(doc.get("park", []))
    )
    retrieve = tuple(
        RetrieveRequest(
            _int(e, "id", f"retrieve[{k}]"),
            Cell(_int(e, "row", f"retrieve[{k}]"), _int(e, "col", f"retrieve[{k}]")),
            Cell(0, _int(e, "goal_port_col", f"retrieve[{k}]")),
        )
        for k, e in enumerate(doc.get("retrieve", []))
    )
    resident = tuple(
        Resident(
            _int(e, "id", f"resident[{k}]"),
            Cell(_int(e, "row", f"resident[{k}]"), _int(e, "col", f"resident[{k}]")),
        )
        for k, e in enumerate(doc.get("resident", []))
    )
    try:
        return BVPRInstance(layout, park, retrieve, resident)
    except InstanceError as exc:
        raise FormatError(f"instance: {exc}") from exc


def serialize_instance(inst: BVPRInstance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def deserialize_instance(text: str) -> BVPRInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"instance: invalid JSON at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return instance_from_dict(doc)


PLAN_HEADER = ["vehicle", "t", "row", "col"]


def serialize_plan(plan: Plan) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLAN_HEADER)
    for v in sorted(plan.paths):
        for t, c in enumerate(plan.paths[v]):
            w.writerow([v, t, c.row, c.col])
    return buf.getvalue()


def deserialize_plan(text: str) -> Plan:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or not any(rows):
        return Plan()
    header = [h.strip() for h in rows[0]]
    if header != PLAN_HEADER:
        raise FormatError(f"plan line 1: expected header {','.join(PLAN_HEADER)}, got {','.join(header)}")
    paths: Dict[int, List[Cell]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise FormatError(f"plan line {lineno}: expected 4 fields, got {len(row)}")
        try:
            v, t, r, c = (int(x) for x in row)
        except ValueError as exc:
            raise FormatError(f"plan line {lineno}: non-integer field in {row}") from exc
        path = paths.setdefault(v, [])
        if t != len(path):
            raise FormatError(
                f"plan line {lineno}: vehicle {v} timestep {t} out of order, expected {len(path)}"
            )
        path.append(Cell(r, c))
    lengths = {len(p) for p in paths.values()}
    if len(lengths) > 1:
        raise FormatError(f"plan: paths have unequal lengths {sorted(lengths)}")
    return Plan(paths)
