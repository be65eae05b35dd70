"""Run configuration: JSON schema, validation and hashing."""

from __future__ import annotations

import hashlib
import json
from typing import Any

import jsonschema

from .errors import ConfigError

__all__ = ["EXPERIMENTS", "RUN_CONFIG_SCHEMA", "validate_config", "config_hash", "load_config"]

EXPERIMENTS = ("catalog", "density", "subordinate", "decay", "trajectory", "transport", "potential", "cpp-bounds", "verify")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}
_RANGE = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

_JUMPS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["variant"],
    "properties": {
        "variant": {"enum": ["Exponential", "Pareto", "Deterministic"]},
        "params": {"type": "object", "additionalProperties": _NUM},
    },
}

_SPEC = {
    "type": "object",
    "additionalProperties": False,
    "required": ["variant"],
    "properties": {
        "variant": {
            "enum": ["AlphaStable", "Gamma", "TruncatedStable", "SumStable", "ExpWeighted", "DistributedOrder", "CompoundPoisson"]
        },
        "params": {"type": "object", "additionalProperties": _NUM},
        "jumps": _JUMPS,
    },
}

RUN_CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "RunConfig",
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "spec": _SPEC,
        "field": {"type": "string"},
        "observable": {"type": "string"},
        "x": {"oneOf": [_NUM, _NUM_LIST]},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_points": _NUM_LIST,
                "t_range": _RANGE,
                "n_t": {"type": "integer", "minimum": 2},
                "x_points": _NUM_LIST,
                "x_range": _RANGE,
                "n_x": {"type": "integer", "minimum": 2},
                "h": _POS,
                "tau_points": _NUM_LIST,
            },
        },
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n", "seed"],
            "properties": {
                "n": {"type": "integer", "minimum": 100},
                "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
            },
        },
        "cpp": {
            "type": "object",
            "additionalProperties": False,
            "required": ["rate", "jumps", "c", "beta"],
            "properties": {
                "rate": _POS,
                "jumps": _JUMPS,
                "c": _POS,
                "beta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "moment_order": _POS,
                "mgf_radius": _POS,
                "holder_constant": _POS,
                "x_dist": {"type": "number", "minimum": 0},
            },
        },
        "method": {"enum": ["auto", "wright", "euler", "dehoog", "talbot", "gaver-stehfest", "quadrature", "monte_carlo"]},
        "checks": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 13}},
        "quick": {"type": "boolean"},
        "tolerances": {"type": "object", "additionalProperties": _POS},
        "output": {"type": "string"},
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(RUN_CONFIG_SCHEMA)


def validate_config(cfg: Any) -> dict:
    """Validate against :data:`RUN_CONFIG_SCHEMA`; raises :class:`ConfigError`."""
    errors = sorted(_VALIDATOR.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = "; ".join(f"{'/'.join(map(str, e.absolute_path)) or '<root>'}: {e.message}" for e in errors)
        raise ConfigError(f"invalid run configuration: {msgs}")
    return cfg


def config_hash(cfg: dict) -> str:
    """SHA-256 of the canonical JSON of ``cfg`` without its output path."""
    body = {k: v for k, v in cfg.items() if k != "output"}
    return hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return validate_config(cfg)
