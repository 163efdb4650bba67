"""Deterministic report assembly and canonical JSON serialization.

Serialization is byte-reproducible: keys sorted, floats rendered with 17
significant digits, no timestamps or environment data. Tensor values are
emitted as nested arrays addressed by the printed index labels, never as
flattened offsets.
"""

from __future__ import annotations

import math

from .chart import Point
from .expr import Evaluator
from .tensors import DTensor
from .torsion_curvature import Geometry

__all__ = ["canonical_json", "tensor_payload", "point_payload",
           "compute_report", "verify_report"]


def _format_float(value: float) -> str:
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite float {value!r}")
    return format(value, ".17g")


def canonical_json(obj) -> str:
    """Render with sorted keys and fixed float formatting; ends with newline."""
    pieces = []
    _emit(obj, pieces)
    return "".join(pieces) + "\n"


def _emit(obj, out):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r}")
            if k:
                out.append(",")
            out.append(_escape(key))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(text: str) -> str:
    parts = ['"']
    for ch in text:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


def _nest(flat, shape):
    if not shape:
        return flat[0]
    if len(shape) == 1:
        return list(flat)
    step = len(flat) // shape[0]
    return [_nest(flat[k * step:(k + 1) * step], shape[1:])
            for k in range(shape[0])]


def tensor_payload(tensor: DTensor, ev: Evaluator) -> dict:
    values = [ev(e) for e in tensor.entries()]
    labels = list(tensor.labels) if tensor.labels is not None else None
    payload = {
        "labels": labels,
        "shape": list(tensor.shape),
        "slots": [f"{s.variance} {s.kind}" for s in tensor.sig],
        "values": _nest(values, tensor.shape),
    }
    return payload


def point_payload(point: Point) -> dict:
    return {"t": list(point.t), "x": list(point.x),
            "p": [list(row) for row in point.p]}


def _table_payload(table, ev: Evaluator) -> dict:
    out = {}
    for cell in table.cells:
        payload = tensor_payload(cell.tensor, ev)
        payload["row"] = cell.row
        payload["column"] = cell.column
        payload["zero_cell"] = cell.is_zero
        out[cell.key] = payload
    return out


def compute_report(version: str, config_hash: str, geometry: Geometry,
                   points) -> dict:
    space = geometry.space
    evaluated = []
    for pt in points:
        ev = Evaluator(space.chart, pt)
        evaluated.append({
            "point": point_payload(pt),
            "nonlinear_connection": {
                "N1": tensor_payload(geometry.connection.n1, ev),
                "N2": tensor_payload(geometry.connection.n2, ev),
            },
            "cartan": {
                "chi": tensor_payload(geometry.coefficients.chi, ev),
                "A": tensor_payload(geometry.coefficients.A, ev),
                "Hc": tensor_payload(geometry.coefficients.Hc, ev),
                "C": tensor_payload(geometry.coefficients.C, ev),
            },
            "torsion": _table_payload(geometry.torsion, ev),
            "curvature": _table_payload(geometry.curvature, ev),
        })
    return {
        "version": version,
        "config_hash": config_hash,
        "kind": "compute",
        "space": {
            "m": space.m,
            "n": space.n,
            "branch": geometry.torsion.branch,
            "body": "electrodynamic" if space.is_electrodynamic else "raw",
        },
        "points": evaluated,
    }


def verify_report(version: str, config_hash: str, space, reports,
                  samples: int, seed: int, tolerances: dict) -> dict:
    return {
        "version": version,
        "config_hash": config_hash,
        "kind": "verify",
        "space": {"m": space.m, "n": space.n,
                  "body": "electrodynamic" if space.is_electrodynamic else "raw"},
        "samples": samples,
        "seed": seed,
        "tolerances": dict(tolerances),
        "suites": [{
            "name": r.name,
            "max_residual": r.max_residual,
            "samples": r.samples,
            "tolerance": r.tolerance,
            "passed": r.passed,
        } for r in reports],
        "passed": all(r.passed for r in reports),
    }
