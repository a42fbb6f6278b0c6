"""JSON schemas, parsing of bodies/measures/problems, and canonical output."""

from __future__ import annotations

import json
import math
from typing import Any

import jsonschema
import numpy as np

from .errors import InputError
from .geometry import Ball, HBody, Polytope2, Polytope3, SymBox, wulff_shape
from .measure import MeasureVector

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_VEC = {"type": "array", "items": _NUM, "minItems": 2}

BODY_SCHEMA = {
    "type": "object",
    "required": ["dim", "kind"],
    "properties": {
        "dim": {"type": "integer", "minimum": 2, "maximum": 10},
        "kind": {"enum": ["hbody", "polytope", "box", "ball"]},
        "directions": {"type": "array", "items": _VEC, "minItems": 2},
        "support": {"type": "array", "items": _POS, "minItems": 2},
        "half_widths": {"type": "array", "items": _POS, "minItems": 2},
        "radius": _POS,
    },
    "allOf": [
        {"if": {"properties": {"kind": {"enum": ["hbody", "polytope"]}}},
         "then": {"required": ["directions", "support"]}},
        {"if": {"properties": {"kind": {"const": "box"}}}, "then": {"required": ["half_widths"]}},
        {"if": {"properties": {"kind": {"const": "ball"}}}, "then": {"required": ["radius"]}},
    ],
}

MEASURE_PROPS = {
    "dim": {"type": "integer", "minimum": 2, "maximum": 3},
    "atoms": {"type": "array", "minItems": 2, "items": {
        "type": "object", "required": ["v", "c"],
        "properties": {"v": _VEC, "c": _POS}}},
    "total": _NUM,
}

OPTION_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "residual_tol": _POS,
        "max_newton_iters": {"type": "integer", "minimum": 1},
        "fd_step_rel": _POS,
        "continuation_steps": {"type": "integer", "minimum": 1},
        "initial_support": _POS,
        "start_small": {"type": "boolean"},
        "force": {"type": "boolean"},
    },
}

PROBLEM_SCHEMA = {
    "type": "object",
    "required": ["dim", "atoms"],
    "properties": dict(MEASURE_PROPS, mode={"enum": ["plain", "normalized"]}, alpha=_POS,
                       options=OPTION_SCHEMA),
}

SMOOTH_SCHEMA = {
    "type": "object",
    "required": ["N", "f"],
    "properties": {
        "N": {"type": "integer", "minimum": 8},
        "f": {"type": "array", "items": _POS, "minItems": 8},
        "options": {"type": "object", "additionalProperties": False, "properties": {
            "residual_tol": _POS, "continuation_steps": {"type": "integer", "minimum": 1},
            "force": {"type": "boolean"}}},
    },
}

VERIFY_SCHEMA = {
    "type": "object",
    "properties": {
        "suite": {"enum": ["ehrhard", "log_concavity", "minkowski", "isoperimetric"]},
        "pairs": {"type": "array", "minItems": 1,
                  "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": BODY_SCHEMA}},
    },
}

SWEEP_SCHEMA = {
    "type": "object",
    "required": ["mu1"],
    "properties": {"mu1": _POS, "grid": {"type": "integer", "minimum": 3}, "mu2": _POS},
}

BALL_SCHEMA = {
    "type": "object",
    "required": ["c", "n"],
    "properties": {"c": _POS, "n": {"type": "integer", "minimum": 2}},
}


def _where(err: jsonschema.ValidationError) -> str:
    path = "/".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def validate(doc: Any, schema: dict) -> None:
    """Raise InputError naming the offending field."""
    v = jsonschema.Draft202012Validator(schema)
    errors = sorted(v.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise InputError(f"invalid input at {_where(best)}: {best.message}")


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc


# ----------------------------------------------------------------------------
# parsing


def _check_dims(rows, dim, field):
    for i, r in enumerate(rows):
        if len(r) != dim:
            raise InputError(f"{field}/{i}: expected {dim} components, got {len(r)}")


def parse_body(doc: dict):
    validate(doc, BODY_SCHEMA)
    dim, kind = doc["dim"], doc["kind"]
    try:
        if kind == "box":
            if len(doc["half_widths"]) != dim:
                raise InputError("half_widths: length must equal dim")
            return SymBox(doc["half_widths"])
        if kind == "ball":
            return Ball(doc["radius"], dim)
        if dim not in (2, 3):
            raise InputError("dim: polytopes are supported in dimensions 2 and 3")
        _check_dims(doc["directions"], dim, "directions")
        if len(doc["support"]) != len(doc["directions"]):
            raise InputError("support: length must equal the number of directions")
        body = HBody.from_normals(doc["directions"], doc["support"])
        return wulff_shape(body) if kind == "polytope" else body
    except InputError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise InputError(f"invalid body: {exc}") from exc


def parse_measure(doc: dict, schema: dict | None = None) -> MeasureVector:
    validate(doc, schema or {"type": "object", "required": ["dim", "atoms"],
                             "properties": MEASURE_PROPS})
    dim = doc["dim"]
    dirs = [a["v"] for a in doc["atoms"]]
    _check_dims(dirs, dim, "atoms")
    w = np.array([a["c"] for a in doc["atoms"]], dtype=float)
    d = np.array(dirs, dtype=float)
    norms = np.linalg.norm(d, axis=1)
    if np.any(norms == 0):
        raise InputError("atoms: direction vectors must be nonzero")
    mv = MeasureVector(d / norms[:, None], w)
    if "total" in doc and not math.isclose(doc["total"], mv.total, rel_tol=1e-9, abs_tol=1e-15):
        raise InputError(f"total: {doc['total']!r} disagrees with twice the atom sum {mv.total!r}")
    return mv


# ----------------------------------------------------------------------------
# output


def to_plain(obj: Any) -> Any:
    """Recursively convert numpy values to JSON-native ones; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def canonical_json(obj: Any) -> str:
    """Sorted keys, two-space indent, shortest round-trip float repr, trailing newline."""
    return json.dumps(to_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def measure_to_dict(mv: MeasureVector) -> dict:
    return {"dim": mv.dimension,
            "atoms": [{"v": v.tolist(), "c": float(c)} for v, c in zip(mv.directions, mv.weights)],
            "total": mv.total}


def body_to_dict(body) -> dict:
    if isinstance(body, SymBox):
        return {"dim": body.dimension, "kind": "box", "half_widths": body.half_widths.tolist()}
    if isinstance(body, Ball):
        return {"dim": body.dimension, "kind": "ball", "radius": body.radius}
    if isinstance(body, (Polytope2, Polytope3)):
        body = body.to_hbody()
    return {"dim": body.dimension, "kind": "hbody", "directions": body.directions.tolist(),
            "support": body.support.tolist()}
