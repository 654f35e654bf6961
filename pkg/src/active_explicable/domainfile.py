"""JSON domain files: loading, validation with line-anchored errors, and export.

Layout::

    {
      "schema_version": 1,
      "name": "optional label",
      "fluents": ["p", "q", ...],
      "actions": [{"id": "a", "pre": [...], "add": [...], "del": [...], "cost": "3/2"}, ...],
      "features": [{"id": "f", "kind": "scale_cost", "target": ["a"], "payload": 2}, ...],
      "true_mask": 0,
      "problems": [{"initial": [...], "goal": [...]}, ...]
    }

Costs may be integers, decimal strings or "p/q" strings and are kept exact.
Unknown keys anywhere in the document are rejected.
"""

from __future__ import annotations

import json
from json.decoder import scanstring
from pathlib import Path
from typing import Union

import jsonschema

from .core import (
    FEATURE_KINDS,
    DomainError,
    DomainModel,
    ModelFeature,
    ModelSpace,
    PlanningProblem,
    action_from_dict,
    action_to_dict,
    build_model_space,
)

SCHEMA_VERSION = 1

_number = {"anyOf": [{"type": "integer", "minimum": 0}, {"type": "number", "minimum": 0}, {"type": "string"}]}
_names = {"type": "array", "items": {"type": "string"}}
_action = {
    "type": "object",
    "required": ["id"],
    "additionalProperties": False,
    "properties": {"id": {"type": "string"}, "pre": _names, "add": _names, "del": _names, "cost": _number},
}

SCHEMA = {
    "type": "object",
    "required": ["fluents", "actions", "problems"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "fluents": _names,
        "actions": {"type": "array", "items": _action},
        "features": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "kind"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "kind": {"enum": list(FEATURE_KINDS)},
                    "target": {"anyOf": [{"type": "string"}, _names]},
                    "payload": {},
                },
            },
        },
        "true_mask": {"type": "integer", "minimum": 0},
        "problems": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["initial", "goal"],
                "additionalProperties": False,
                "properties": {"initial": _names, "goal": _names},
            },
        },
    },
}


class DomainFileError(ValueError):
    def __init__(self, message: str, line: int = None, path: str = None):
        self.line = line
        self.path = path
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{path}: {where}{message}" if path else f"{where}{message}")


def _skip_ws(text, pos):
    while pos < len(text) and text[pos] in " \t\r\n":
        pos += 1
    return pos


def value_offsets(text: str) -> dict:
    """Character offset of every value in a JSON document, keyed by its path tuple."""
    decoder = json.JSONDecoder()
    offsets = {}

    def parse(pos, path):
        pos = _skip_ws(text, pos)
        offsets[path] = pos
        ch = text[pos]
        if ch == "{":
            pos = _skip_ws(text, pos + 1)
            if text[pos] == "}":
                return pos + 1
            while True:
                key, pos = scanstring(text, pos + 1)
                pos = _skip_ws(text, pos) + 1  # ':'
                pos = _skip_ws(text, parse(pos, path + (key,)))
                if text[pos] == "}":
                    return pos + 1
                pos = _skip_ws(text, pos + 1)
        if ch == "[":
            pos = _skip_ws(text, pos + 1)
            if text[pos] == "]":
                return pos + 1
            i = 0
            while True:
                pos = _skip_ws(text, parse(pos, path + (i,)))
                i += 1
                if text[pos] == "]":
                    return pos + 1
                pos += 1
        _, end = decoder.raw_decode(text, pos)
        return end

    parse(0, ())
    return offsets


def _line_for(text, path) -> int:
    offsets = value_offsets(text)
    path = tuple(path)
    while path not in offsets and path:
        path = path[:-1]
    return text.count("\n", 0, offsets.get(path, 0)) + 1


def _fmt_path(path) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def parse_domain(text: str, source: str = None):
    """Parse and validate a domain document; returns (ModelSpace, problems, name)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainFileError(exc.msg, exc.lineno, source) from None
    errors = sorted(jsonschema.Draft7Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise DomainFileError(
            f"{_fmt_path(err.absolute_path)}: {err.message}", _line_for(text, err.absolute_path), source
        )
    return _build(doc, text, source)


def _build(doc, text, source):
    def fail(exc, path):
        raise DomainFileError(f"{_fmt_path(path)}: {exc}", _line_for(text, path), source) from None

    fluents = frozenset(doc["fluents"])
    actions = []
    for i, spec in enumerate(doc["actions"]):
        try:
            actions.append(action_from_dict(spec))
        except (DomainError, ValueError) as exc:
            fail(exc, ("actions", i))
    try:
        base = DomainModel(fluents, tuple(actions), doc.get("name", "base"))
    except DomainError as exc:
        fail(exc, ("actions",))
    features = []
    for i, spec in enumerate(doc.get("features", [])):
        try:
            features.append(ModelFeature(spec["id"], spec["kind"], spec.get("target", ()), spec.get("payload")))
        except DomainError as exc:
            fail(exc, ("features", i))
    try:
        space = build_model_space(base, features, doc.get("true_mask", 0))
    except (DomainError, KeyError, TypeError) as exc:
        fail(exc, ("features",))
    problems = []
    for i, spec in enumerate(doc["problems"]):
        p = PlanningProblem(frozenset(spec["initial"]), frozenset(spec["goal"]))
        try:
            base.check_problem(p)
        except DomainError as exc:
            fail(exc, ("problems", i))
        problems.append(p)
    return space, problems, doc.get("name", "")


def load_domain(path: Union[str, Path]):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DomainFileError(f"cannot read domain file: {exc.strerror}", path=str(path)) from None
    return parse_domain(text, str(path))


def _feature_to_dict(f: ModelFeature) -> dict:
    payload = f.payload
    if f.kind == "add_action":
        payload = [action_to_dict(a) if not isinstance(a, dict) else a for a in payload]
    elif isinstance(payload, dict):
        payload = {k: str(v) for k, v in sorted(payload.items())}
    elif payload is not None and not isinstance(payload, (int, str, list, tuple)):
        payload = str(payload)
    elif isinstance(payload, tuple):
        payload = list(payload)
    return {"id": f.id, "kind": f.kind, "target": list(f.target), "payload": payload}


def domain_to_dict(space: ModelSpace, problems, name: str = "") -> dict:
    doc = {"schema_version": SCHEMA_VERSION}
    if name:
        doc["name"] = name
    doc["fluents"] = sorted(space.base.fluents)
    doc["actions"] = [action_to_dict(a) for a in space.base.actions]
    doc["features"] = [_feature_to_dict(f) for f in space.features]
    doc["true_mask"] = space.true_mask
    doc["problems"] = [{"initial": sorted(p.initial), "goal": sorted(p.goal)} for p in problems]
    return doc


def dump_domain(space: ModelSpace, problems, path, name: str = "") -> None:
    Path(path).write_text(json.dumps(domain_to_dict(space, problems, name), indent=1) + "\n")
