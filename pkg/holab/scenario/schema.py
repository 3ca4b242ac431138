"""
Scenario files: JSON documents describing one Lie pair or one foliation.

Matrices are row-major nested lists; vectors in a Lie algebra are given in
coordinates of the ambient basis. The schema below is the single source of
truth and is checked with jsonschema before anything is built.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

from jsonschema import Draft7Validator
from jsonschema.exceptions import best_match

from holab.config import DEFAULT_TOLERANCES, Tolerances
from holab.exceptions import ScenarioError

logger = logging.getLogger(__name__)

_NUMBER = {"type": "number"}
_VECTOR = {"type": "array", "items": _NUMBER, "minItems": 1}
_VECTORS = {"type": "array", "items": _VECTOR}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}
_EXPR = {"type": "string", "minLength": 1}

LIE_PAIR_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["algebra", "subalgebra"],
    "additionalProperties": False,
    "properties": {
        "algebra": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "catalog": {"type": "string"},
                "basis": {"type": "array", "items": _MATRIX, "minItems": 1},
                "structure_constants": {"type": "array", "items": _MATRIX, "minItems": 1},
            },
        },
        "subalgebra": _VECTORS,
        "complement": _VECTORS,
        "alt_complement": _VECTORS,
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "elements": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"h": _VECTORS, "g": _VECTORS},
        },
        "probe": {"type": "array", "items": _VECTOR, "minItems": 2, "maxItems": 2},
        "expected": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bott": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["b", "matrix"],
                        "additionalProperties": False,
                        "properties": {"b": _VECTOR, "matrix": _MATRIX},
                    },
                },
                "linear_parts": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["h", "matrix"],
                        "additionalProperties": False,
                        "properties": {"h": _VECTOR, "matrix": _MATRIX},
                    },
                },
                "ideal": {"type": "boolean"},
            },
        },
    },
}

_PATH_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["start"],
    "additionalProperties": False,
    "properties": {
        "start": _VECTOR,
        "interval": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        "word": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": [{"type": "integer", "minimum": 0}, _NUMBER],
            },
        },
        "expected": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "linear_part": _MATRIX,
                "variational": _MATRIX,
                "closed_form": _EXPR,
                "trivial": {"type": "boolean"},
            },
        },
    },
    "oneOf": [{"required": ["interval"]}, {"required": ["word"]}],
}

FOLIATION_SCHEMA: Dict[str, Any] = {
    "type": "object",
    "required": ["model", "box", "paths"],
    "additionalProperties": False,
    "properties": {
        "model": {"enum": ["ode_graph", "spanned"]},
        "box": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
        },
        "rhs": {"type": "array", "items": _EXPR, "minItems": 1},
        "fields": {"type": "array", "items": {"type": "array", "items": _EXPR, "minItems": 2}, "minItems": 1},
        "paths": {"type": "array", "items": _PATH_SCHEMA, "minItems": 1},
        "homotopic": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
        },
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "samples": _VECTORS,
    },
}

SCENARIO_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "holab scenario",
    "type": "object",
    "required": ["name", "kind"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "kind": {"enum": ["lie_pair", "foliation"]},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
        },
        "lie_pair": LIE_PAIR_SCHEMA,
        "foliation": FOLIATION_SCHEMA,
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "lie_pair"}}},
            "then": {"required": ["lie_pair"], "not": {"required": ["foliation"]}},
        },
        {
            "if": {"properties": {"kind": {"const": "foliation"}}},
            "then": {"required": ["foliation"], "not": {"required": ["lie_pair"]}},
        },
    ],
}

_VALIDATOR = Draft7Validator(SCENARIO_SCHEMA)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def validate_document(data: Any) -> None:
    """
    Check a parsed JSON document against the scenario schema.

    Raises:
        ScenarioError: With the JSON pointer of the most relevant violation
    """
    error = best_match(_VALIDATOR.iter_errors(data))
    if error is not None:
        raise ScenarioError(f"schema violation: {error.message}", _pointer(error.absolute_path))


@dataclass(frozen=True)
class Scenario:
    """
    A validated scenario.

    ``payload`` is the kind-specific section exactly as it appears in the file.
    """

    name: str
    kind: str
    payload: Dict[str, Any]
    description: str = ""
    seed: Optional[int] = None
    tolerance_overrides: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: Any) -> "Scenario":
        """
        Build a scenario from a parsed document.

        Raises:
            ScenarioError: On schema violations or unknown tolerance keys
        """
        validate_document(data)
        overrides = dict(data.get("tolerances", {}))
        try:
            DEFAULT_TOLERANCES.with_overrides(overrides)
        except ValueError as exc:
            raise ScenarioError(str(exc), "/tolerances")
        return cls(
            name=data["name"],
            kind=data["kind"],
            payload=data[data["kind"]],
            description=data.get("description", ""),
            seed=data.get("seed"),
            tolerance_overrides=overrides,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name, "kind": self.kind, self.kind: self.payload}
        if self.description:
            data["description"] = self.description
        if self.seed is not None:
            data["seed"] = self.seed
        if self.tolerance_overrides:
            data["tolerances"] = dict(self.tolerance_overrides)
        return data

    def tolerances(self, scale: float = 1.0) -> Tolerances:
        """Defaults, then file overrides, then ``scale`` on acceptance thresholds."""
        tolerances = DEFAULT_TOLERANCES.with_overrides(self.tolerance_overrides)
        return tolerances.scaled(scale) if scale != 1.0 else tolerances


def loads_scenario(text: str, source: str = "<string>") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: invalid JSON: {exc.msg} at line {exc.lineno}, column {exc.colno}")
    return Scenario.from_dict(data)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Read and validate a scenario file.

    Raises:
        ScenarioError: If the file is unreadable, not JSON or schema-invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc.strerror}")
    logger.info("loaded scenario file %s", path)
    return loads_scenario(text, str(path))


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n"


def dump_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_scenario(scenario), encoding="utf-8")
