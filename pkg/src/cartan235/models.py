"""Model descriptions: coordinates, a basis of the plane field, working
covectors, and an optional coframe block.

Models are single JSON documents validated against MODEL_SCHEMA; all
rationals are strings like "3/4" (or plain integers).  The Monge shorthand
z' = F(y'') expands to X1 = d/dq, X2 = d/dx + p d/dy + q d/dp + F d/dz on
coordinates (x, y, p, q, z).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

import jsonschema

from .cartan import CartanCoframe
from .errors import ModelError
from .fields import VectorField
from .ratfunc import parse_expression

MONGE_COORDS = ("x", "y", "p", "q", "z")

_RATIONAL = {"type": ["string", "integer"], "pattern": "^-?[0-9]+(/[0-9]+)?$"}
_EXPR = {"type": "string", "minLength": 1}
_FORM_ROW = {"type": "array", "items": _EXPR, "minItems": 5, "maxItems": 5}

MODEL_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cartan235 model",
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "coordinates": {
            "type": "array",
            "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z_0-9]*$"},
            "minItems": 5,
            "maxItems": 5,
        },
        "fields": {
            "type": "object",
            "properties": {"x1": _FORM_ROW, "x2": _FORM_ROW},
            "required": ["x1", "x2"],
            "additionalProperties": False,
        },
        "monge": {
            "type": "object",
            "properties": {"f": _EXPR},
            "required": ["f"],
            "additionalProperties": False,
        },
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "q": {"type": "array", "items": _RATIONAL, "minItems": 5, "maxItems": 5},
                    "u": {"type": "array", "items": _RATIONAL, "minItems": 2, "maxItems": 2},
                },
                "required": ["q", "u"],
                "additionalProperties": False,
            },
        },
        "orders": {
            "type": "object",
            "properties": {
                "t_order": {"type": "integer", "minimum": 6},
                "tau_order": {"type": "integer", "minimum": 2},
                "base_degree": {"type": "integer", "minimum": 8},
            },
            "additionalProperties": False,
        },
        "mode": {"enum": ["adapted", "strongly-adapted"]},
        "coframe": {
            "type": "object",
            "properties": {
                "omega": {"type": "array", "items": _FORM_ROW, "minItems": 5, "maxItems": 5},
                "obar": {"type": "array", "items": _FORM_ROW, "minItems": 7, "maxItems": 7},
            },
            "required": ["omega", "obar"],
            "additionalProperties": False,
        },
    },
    "required": ["name", "points"],
    "additionalProperties": False,
}


def parse_rational(text) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"bad rational literal {text!r}") from exc


def rational_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class WorkingPoint:
    base: dict[str, Fraction]
    u: tuple[Fraction, Fraction]

    def label(self, coords: Sequence[str]) -> str:
        qs = ",".join(rational_str(self.base[c]) for c in coords)
        us = ",".join(rational_str(v) for v in self.u)
        return f"q=({qs}) u=({us})"


@dataclass
class ModelSpec:
    name: str
    coords: tuple[str, ...]
    x1: VectorField
    x2: VectorField
    points: list[WorkingPoint]
    mode: str = "adapted"
    orders: dict[str, int] = field(default_factory=dict)
    coframe: CartanCoframe | None = None
    raw: dict | None = None

    def fingerprint(self) -> str:
        doc = self.raw if self.raw is not None else {"name": self.name}
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def monge_fields(coords: Sequence[str], f_text: str) -> tuple[VectorField, VectorField]:
    f = parse_expression(f_text, coords)

    def rf(t):
        return parse_expression(t, coords)

    x1 = VectorField.from_components(coords, [rf("0"), rf("0"), rf("0"), rf("1"), rf("0")])
    x2 = VectorField.from_components(coords, [rf("1"), rf("p"), rf("q"), rf("0"), f])
    return x1, x2


def model_from_json(doc: Mapping[str, Any]) -> ModelSpec:
    try:
        jsonschema.validate(doc, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise ModelError(f"model document invalid at {path}: {exc.message}") from exc
    if ("fields" in doc) == ("monge" in doc):
        raise ModelError("exactly one of 'fields' or 'monge' must be present")
    if "monge" in doc:
        coords = MONGE_COORDS if "coordinates" not in doc else tuple(doc["coordinates"])
        if tuple(coords) != MONGE_COORDS:
            raise ModelError("the monge shorthand fixes coordinates (x, y, p, q, z)")
        x1, x2 = monge_fields(coords, doc["monge"]["f"])
    else:
        if "coordinates" not in doc:
            raise ModelError("explicit fields require a 'coordinates' list")
        coords = tuple(doc["coordinates"])
        if len(set(coords)) != 5:
            raise ModelError("coordinates must be 5 distinct names")
        x1 = VectorField.from_components(coords, [parse_expression(t, coords) for t in doc["fields"]["x1"]])
        x2 = VectorField.from_components(coords, [parse_expression(t, coords) for t in doc["fields"]["x2"]])
    points = []
    for item in doc["points"]:
        base = {c: parse_rational(v) for c, v in zip(coords, item["q"])}
        u = (parse_rational(item["u"][0]), parse_rational(item["u"][1]))
        points.append(WorkingPoint(base, u))
    coframe = None
    if "coframe" in doc:
        coframe = CartanCoframe.from_expressions(coords, doc["coframe"]["omega"], doc["coframe"]["obar"])
    return ModelSpec(
        name=doc["name"],
        coords=coords,
        x1=x1,
        x2=x2,
        points=points,
        mode=doc.get("mode", "adapted"),
        orders=dict(doc.get("orders", {})),
        coframe=coframe,
        raw=dict(doc),
    )


def load_model(path: str | Path) -> ModelSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ModelError(f"model file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ModelError(f"model file is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return model_from_json(doc)


# -- builtin models ----------------------------------------------------------


def _monge_doc(name: str, f: str, points: list[dict]) -> dict:
    return {"name": name, "monge": {"f": f}, "points": points}


def _pt(q: Sequence[str], u: Sequence[str]) -> dict:
    return {"q": list(q), "u": list(u)}


def _coframe_doc(name: str, variant: str) -> dict:
    """Model document for the nilpotent flat realization with its coframe."""
    from . import coframes
    from .ratfunc import format_rational_function as fmt

    cf = {
        "plain": coframes.flat_coframe,
        "nu": lambda: coframes.nu_transformed(coframes.flat_coframe(), "x4", "x1 - x3"),
        "scaled": coframes.flat_coframe_scaled,
    }[variant]()
    # D = ker(w1, w2, w3); its adapted basis is the pair of dual fields in
    # reversed order: X1 = dual_5, X2 = dual_4.
    from .cartan import _dual_fields

    duals = _dual_fields(cf)
    x1, x2 = duals[4], duals[3]
    return {
        "name": name,
        "coordinates": list(cf.coords),
        "fields": {
            "x1": [fmt(c) for c in x1.comps],
            "x2": [fmt(c) for c in x2.comps],
        },
        "points": [
            _pt(("0", "0", "0", "0", "0"), ("0", "1")),
            _pt(("1", "-1", "1/2", "1", "2"), ("1", "1")),
        ],
        "coframe": {
            "omega": [[fmt(c) for c in cf.omega(i).comps] for i in range(1, 6)],
            "obar": [[fmt(c) for c in cf.obar(j).comps] for j in range(1, 8)],
        },
    }


BUILTIN_DOCS: dict[str, dict] = {
    "flat": _monge_doc("flat", "q^2", [
        _pt(("0", "0", "0", "0", "0"), ("0", "1")),
        _pt(("1", "1/2", "1", "2", "1"), ("1", "1")),
    ]),
    "q3": _monge_doc("q3", "q^3", [
        _pt(("0", "0", "0", "1", "0"), ("0", "1")),
        _pt(("1", "1", "1/2", "2", "1"), ("1", "1")),
    ]),
    "q4": _monge_doc("q4", "q^4", [
        _pt(("0", "0", "0", "1", "0"), ("0", "1")),
        _pt(("0", "1", "1", "1/2", "1"), ("1", "1")),
    ]),
    "q2p2": _monge_doc("q2p2", "q^2+p^2", [
        _pt(("0", "0", "0", "1", "0"), ("1", "1")),
        _pt(("0", "0", "1/2", "1", "0"), ("0", "1")),
    ]),
    "q3y2": _monge_doc("q3y2", "q^3+y^2", [
        _pt(("0", "1/2", "1/3", "1", "0"), ("1", "1")),
    ]),
}


def _install_coframe_docs() -> None:
    BUILTIN_DOCS["flat-coframe"] = _coframe_doc("flat-coframe", "plain")
    BUILTIN_DOCS["flat-coframe-nu"] = _coframe_doc("flat-coframe-nu", "nu")
    BUILTIN_DOCS["flat-coframe-scaled"] = _coframe_doc("flat-coframe-scaled", "scaled")


_install_coframe_docs()


def builtin_model(name: str) -> ModelSpec:
    if name not in BUILTIN_DOCS:
        raise ModelError(f"unknown builtin model {name!r}; have {sorted(BUILTIN_DOCS)}")
    return model_from_json(BUILTIN_DOCS[name])
