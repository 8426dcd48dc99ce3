"""Flat key=value config files and validation of raw option mappings"""
from typing import Any, Dict
from pydantic import ValidationError
from app.cli.schemas import RunConfig
from app.core.exceptions import ConfigError

# Human readable types for error messages
EXPECTED_TYPES: Dict[str, str] = {
    "command": "one of constants, reduced, certify, path, saddle, gamma",
    "dim": "integer >= 2",
    "phi": "float in (0, 1)",
    "length": "positive float",
    "xi": "positive float or 'inf'",
    "grid": "integer >= 2",
    "images": "integer >= 3",
    "R": "float >= 1",
    "kappa": "float in (0, 1/2)",
    "samples": "integer >= 2",
    "threads": "positive integer",
    "out": "path",
    "radius": "positive float",
    "phis": "comma-separated floats",
    "field": "path to a CHF1 snapshot",
    "snapshots": "boolean (true/false)",
    "max_iter": "integer >= 0",
    "step": "positive float",
    "tol": "positive float",
}


def validate_options(raw: Dict[str, Any]) -> RunConfig:
    """
    Build a RunConfig from raw option values

    Raises:
        ConfigError: unknown key or value of the wrong type / range
    """
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else "<config>"
        if error["type"] == "extra_forbidden":
            raise ConfigError(key, "a known key", f"unknown config key '{key}'") from exc
        expected = EXPECTED_TYPES.get(key, "valid value")
        raise ConfigError(
            key, expected, f"config key '{key}': expected {expected} ({error['msg']})"
        ) from exc


def parse_config(text: str) -> RunConfig:
    """
    Parse a flat key=value file, one pair per line, '#' starting a comment

    Args:
        text: File contents

    Returns:
        RunConfig with defaults for missing keys
    """
    raw: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "key=value", f"line {number}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key] = value
    return validate_options(raw)
