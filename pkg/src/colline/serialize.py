"""Tagged JSON encoding for the exact values that appear in reports.

Every value serializes to text forms that parse back exactly, so stored
witnesses and certificates can be re-validated from the report alone.
"""

from __future__ import annotations

from fractions import Fraction

from .field import Vector, format_scalar, format_vector, parse_scalar, parse_vector
from .geometry import Line, Plane


def to_jsonable(value):
    if isinstance(value, Fraction):
        return {"type": "scalar", "value": format_scalar(value)}
    if isinstance(value, Vector):
        return {"type": "vector", "value": format_vector(value)}
    if isinstance(value, Line):
        return {
            "type": "line",
            "origin": format_vector(value.origin),
            "direction": format_vector(value.direction),
        }
    if isinstance(value, Plane):
        return {
            "type": "plane",
            "origin": format_vector(value.origin),
            "dir1": format_vector(value.dir1),
            "dir2": format_vector(value.dir2),
        }
    if isinstance(value, (tuple, list)):
        if all(isinstance(v, Fraction) for v in value):
            return {"type": "scalars", "value": [format_scalar(v) for v in value]}
        if all(isinstance(v, Vector) for v in value):
            return {"type": "vectors", "value": [format_vector(v) for v in value]}
        return {"type": "list", "value": [to_jsonable(v) for v in value]}
    if isinstance(value, str):
        return {"type": "text", "value": value}
    if isinstance(value, bool):
        return {"type": "bool", "value": value}
    if isinstance(value, int):
        return {"type": "int", "value": value}
    raise TypeError(f"cannot serialize value of type {type(value).__name__}")


def from_jsonable(obj):
    kind = obj["type"]
    if kind == "scalar":
        return parse_scalar(obj["value"])
    if kind == "vector":
        return parse_vector(obj["value"])
    if kind == "line":
        return Line(parse_vector(obj["origin"]), parse_vector(obj["direction"]))
    if kind == "plane":
        return Plane(
            parse_vector(obj["origin"]),
            parse_vector(obj["dir1"]),
            parse_vector(obj["dir2"]),
        )
    if kind == "scalars":
        return tuple(parse_scalar(v) for v in obj["value"])
    if kind == "vectors":
        return tuple(parse_vector(v) for v in obj["value"])
    if kind == "list":
        return tuple(from_jsonable(v) for v in obj["value"])
    if kind in ("text", "bool", "int"):
        return obj["value"]
    raise ValueError(f"unknown tagged value type {kind!r}")
