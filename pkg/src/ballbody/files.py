"""JSON file formats for generator sets, arc polygons, and body results"""

from __future__ import annotations
from collections.abc import Iterable
import json
import math
import os
from pathlib import Path
import tempfile
from typing import Any
from .core import (
    EMPTY,
    Arc,
    ArcPolygon,
    BallBodyResult,
    DomainError,
    Empty,
    PointSet,
    Region,
    SinglePoint,
)

AnyPath = str | os.PathLike[str]


def _reject_constant(name: str) -> float:
    raise DomainError(f"Non-finite number {name} is not allowed")


def loads(text: str) -> Any:
    """Parse JSON, rejecting ``NaN`` and ``Infinity``"""
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise DomainError(f"Malformed JSON: {e}") from e


def dumps(obj: Any) -> str:
    """
    Serialize to JSON.  Floats are written with the shortest representation
    that reads back to the same double, so save∘load∘save is byte-identical.
    """
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_atomic(path: AnyPath, text: str) -> None:
    """Replace the file at ``path`` with ``text`` via a temporary file"""
    p = Path(os.fsdecode(path))
    fd, tmp = tempfile.mkstemp(
        dir=p.parent or Path("."), prefix=f".{p.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            fp.write(text)
        os.replace(tmp, p)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{what} must be a number, got {value!r}")
    x = float(value)
    if not math.isfinite(x):
        raise DomainError(f"{what} must be finite")
    return x


def _coords(value: Any, what: str, dim: int | None = None) -> list[float]:
    if not isinstance(value, list):
        raise DomainError(f"{what} must be a list of numbers")
    out = [_number(c, what) for c in value]
    if dim is not None and len(out) != dim:
        raise DomainError(f"{what} must have {dim} coordinates, got {len(out)}")
    return out


def _require(obj: Any, *keys: str) -> dict[str, Any]:
    if not isinstance(obj, dict):
        raise DomainError("Expected a JSON object")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise DomainError(f"Missing field(s): {', '.join(missing)}")
    return obj


def point_set_from_json(obj: Any) -> PointSet:
    data = _require(obj, "dim", "r", "points")
    dim = data["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int):
        raise DomainError(f"dim must be an integer, got {dim!r}")
    if not isinstance(data["points"], list):
        raise DomainError("points must be a list")
    pts = [_coords(p, "Point", dim) for p in data["points"]]
    return PointSet.from_coords(pts, _number(data["r"], "r"))


def point_set_to_json(x: PointSet) -> dict[str, Any]:
    return {"dim": x.dim, "r": x.radius, "points": [list(p) for p in x.points]}


def arc_polygon_to_json(poly: ArcPolygon) -> dict[str, Any]:
    return {
        "r": poly.radius,
        "full_disk": poly.full_disk,
        "arcs": [
            {
                "center": list(a.center),
                "start_angle": a.start_angle,
                "end_angle": a.end_angle,
            }
            for a in poly.arcs
        ],
        "vertices": [list(v) for v in poly.vertices],
    }


def arc_polygon_from_json(obj: Any) -> ArcPolygon:
    data = _require(obj, "r", "full_disk", "arcs")
    if not isinstance(data["full_disk"], bool):
        raise DomainError("full_disk must be a boolean")
    if not isinstance(data["arcs"], list):
        raise DomainError("arcs must be a list")
    arcs = []
    for a in data["arcs"]:
        a = _require(a, "center", "start_angle", "end_angle")
        cx, cy = _coords(a["center"], "Arc center", 2)
        arcs.append(
            Arc(
                (cx, cy),
                _number(a["start_angle"], "start_angle"),
                _number(a["end_angle"], "end_angle"),
            )
        )
    poly = ArcPolygon(_number(data["r"], "r"), tuple(arcs), data["full_disk"])
    poly.validate()
    if "vertices" in data:
        given = [_coords(v, "Vertex", 2) for v in data["vertices"]]
        derived = poly.vertices
        tol = 1e-9 * max(1.0, poly.radius)
        if len(given) != len(derived) or any(
            math.dist(g, d) > tol for g, d in zip(given, derived)
        ):
            raise DomainError("Vertices do not match the arcs")
    return poly


def result_to_json(b: BallBodyResult) -> dict[str, Any]:
    if isinstance(b, Empty):
        return {"result": "empty"}
    elif isinstance(b, SinglePoint):
        return {"result": "point", "point": list(b.point)}
    return {"result": "region", **arc_polygon_to_json(b.polygon)}


def result_from_json(obj: Any) -> BallBodyResult:
    """
    Parse a body file: a ``{"result": ...}`` record, or a bare arc polygon
    document
    """
    data = _require(obj)
    kind = data.get("result", "region")
    if kind == "empty":
        return EMPTY
    elif kind == "point":
        _require(data, "point")
        return SinglePoint(tuple(_coords(data["point"], "Point")))
    elif kind == "region":
        return Region(arc_polygon_from_json(data))
    raise DomainError(f"Unknown result kind {kind!r}")


def load_json(path: AnyPath) -> Any:
    p = Path(os.fsdecode(path))
    return loads(p.read_text(encoding="utf-8"))


def load_point_set(path: AnyPath) -> PointSet:
    return point_set_from_json(load_json(path))


def load_result(path: AnyPath) -> BallBodyResult:
    return result_from_json(load_json(path))


def _finite(obj: Any) -> Any:
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    elif isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    else:
        return obj


def jsonl(records: Iterable[dict[str, Any]]) -> str:
    """One JSON document per line; non-finite numbers are written as ``null``"""
    return "".join(json.dumps(_finite(rec), allow_nan=False) + "\n" for rec in records)
