"""Run configuration: JSON schema, loading, canonical hashing."""

from __future__ import annotations

import hashlib
import json

import jsonschema

from .errors import ConfigError
from .manifolds import SubmanifoldSpec
from .solver import SolverConfig
from .structures import AlmostComplexStructure

__all__ = [
    "RUN_SCHEMA",
    "load_config",
    "parse_config",
    "canonical_json",
    "config_hash",
]

_TERM = {
    "type": "object",
    "additionalProperties": False,
    "required": ["exponents", "coefficient"],
    "properties": {
        "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "coefficient": {
            "type": "array", "items": {"type": "number"},
            "minItems": 2, "maxItems": 2,
        },
    },
}

_STRUCTURE_TERM = {
    "type": "object",
    "additionalProperties": False,
    "required": ["row", "col", "exponents", "coefficient"],
    "properties": {
        "row": {"type": "integer", "minimum": 0},
        "col": {"type": "integer", "minimum": 0},
        "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "coefficient": {"type": "number"},
    },
}

RUN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["manifold"],
    "properties": {
        "manifold": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "gamma"],
            "properties": {
                "n": {"type": "integer", "minimum": 2},
                "gamma": {"type": "number", "minimum": 0,
                          "exclusiveMaximum": 0.5},
                "R_terms": {"type": "array", "items": _TERM},
                "h_terms": {
                    "type": "object",
                    "patternProperties": {
                        "^[0-9]+$": {"type": "array", "items": _TERM}
                    },
                    "additionalProperties": False,
                },
            },
        },
        "structure": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n"],
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "degree": {"type": "integer", "minimum": 0},
                "validity_radius": {"type": "number", "exclusiveMinimum": 0},
                "terms": {"type": "array", "items": _STRUCTURE_TERM},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_theta": {"type": "integer", "minimum": 8},
                "n_radial": {"type": "integer", "minimum": 4},
                "n_coef": {"type": "integer", "minimum": 4},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol_residual": {"type": "number", "exclusiveMinimum": 0},
                "max_newton": {"type": "integer", "minimum": 1},
                "ladder_steps": {"type": "integer", "minimum": 1},
                "ladder_ratio": {"type": "number", "exclusiveMinimum": 0,
                                 "exclusiveMaximum": 1},
                "max_halvings": {"type": "integer", "minimum": 0},
                "picard_tol": {"type": "number", "exclusiveMinimum": 0},
                "picard_max_iterations": {"type": "integer", "minimum": 1},
            },
        },
        "delta": {"type": "number", "minimum": 0},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "c": {"type": "array", "items": {"type": "number"}},
        "box": {
            "type": "object",
            "additionalProperties": False,
            "required": ["r_range", "r_count"],
            "properties": {
                "r_range": {"type": "array", "items": {"type": "number"},
                            "minItems": 2, "maxItems": 2},
                "r_count": {"type": "integer", "minimum": 2},
                "c_range": {"type": "array", "items": {"type": "number"},
                            "minItems": 2, "maxItems": 2},
                "c_count": {"type": "integer", "minimum": 1},
            },
        },
        "foliation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "coverage_samples": {"type": "integer", "minimum": 1},
                "margin": {"type": "number", "minimum": 0},
            },
        },
        "fault_injection": {
            "type": "object",
            "additionalProperties": False,
            "required": ["target"],
            "properties": {
                "target": {"type": "string", "enum": ["hilbert"]},
                "scale": {"type": "number"},
            },
        },
    },
}


def canonical_json(payload: dict) -> str:
    """Deterministic serialisation: sorted keys, fixed separators."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()[:16]


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(raw, RUN_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(
            f"config {path} violates the schema: {exc.message}"
        ) from exc
    return raw


def parse_config(raw: dict):
    """Instantiate (manifold spec, structure, solver config) from raw JSON."""
    try:
        spec = SubmanifoldSpec.from_config(raw["manifold"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad manifold block: {exc}") from exc
    if "structure" in raw:
        s_cfg = dict(raw["structure"])
        try:
            structure = AlmostComplexStructure.from_config(s_cfg)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad structure block: {exc}") from exc
    else:
        structure = AlmostComplexStructure(spec.n, validity_radius=4.0)
    grid = raw.get("grid", {})
    solver = raw.get("solver", {})
    cfg = SolverConfig(
        n_coef=grid.get("n_coef", 32),
        n_radial=grid.get("n_radial", 36),
        n_theta=grid.get("n_theta", 128),
        tol_residual=solver.get("tol_residual", 1e-8),
        max_newton=solver.get("max_newton", 25),
        ladder_steps=solver.get("ladder_steps", 8),
        ladder_ratio=solver.get("ladder_ratio", 0.5),
        max_halvings=solver.get("max_halvings", 4),
        picard_tol=solver.get("picard_tol", 1e-11),
        picard_max_iterations=solver.get("picard_max_iterations", 80),
    )
    return spec, structure, cfg
