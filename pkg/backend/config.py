"""
Plain-text experiment configuration.

Grammar (one setting per line):

    # comment                      ignored, as are blank lines
    key = value                    key is an ExperimentConfig field name
    N_R_list = 30, 50, 100         lists are comma-separated
    ebn0_db_grid = -12:0:1         or start:stop:step, stop included
    normalize_pdp = true           booleans are true / false
    stop_at_errors = none          disables early stopping

Detectors are named mf, mmse, zf, idf; modes semi, mc, bounds. Every
rejection is a ConfigError naming the key.
"""
import logging
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from backend.models import ExperimentConfig
from utils.errors import ConfigError

LOGGER = logging.getLogger(__name__)

LIST_KEYS = {"N_R_list", "ebn0_db_grid", "detectors", "modes"}
NONE_WORDS = {"none", "null", ""}


def _parse_range(key: str, text: str) -> list:
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ConfigError(f"{key}: expected start:stop:step, got {text!r}", key=key) from None
    if step == 0 or (stop - start) / step < 0:
        raise ConfigError(f"{key}: range {text!r} is empty", key=key)
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def parse_value(key: str, raw: str):
    """Turn the text of one setting into what ExperimentConfig expects."""
    text = raw.strip()
    if key in LIST_KEYS:
        if key == "ebn0_db_grid" and ":" in text:
            return _parse_range(key, text)
        return [p.strip() for p in text.split(",") if p.strip()]
    if text.lower() in NONE_WORDS and key == "stop_at_errors":
        return None
    return text


def _first_error_key(e: ValidationError) -> str:
    loc = e.errors()[0].get("loc") or ()
    return str(loc[0]) if loc else None


def validate_config(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig, converting pydantic failures to ConfigError."""
    unknown = sorted(set(data) - set(ExperimentConfig.model_fields))
    if unknown:
        raise ConfigError(f"unknown key: {unknown[0]}", key=unknown[0])
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        key = _first_error_key(e)
        msg = e.errors()[0].get("msg", str(e))
        raise ConfigError(f"{key}: {msg}" if key else msg, key=key) from None


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse a configuration document; omitted keys keep their defaults.

    Args:
        text: document in the grammar above

    Returns:
        validated ExperimentConfig
    """
    data = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if key in data:
            raise ConfigError(f"{key}: set more than once (line {lineno})", key=key)
        data[key] = parse_value(key, raw)
    return validate_config(data)


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ", ".join(_format_value(v) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    return repr(value) if isinstance(value, float) else str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    """Every field as `key = value`, in declaration order; parse_config reads it back."""
    lines = [f"{name} = {_format_value(getattr(cfg, name))}" for name in ExperimentConfig.model_fields]
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    LOGGER.info("Loaded config from %s", path)
    return parse_config(text)


def with_overrides(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Apply raw-text overrides on top of `cfg` and re-validate."""
    data = cfg.model_dump()
    for key, raw in overrides.items():
        data[key] = parse_value(key, raw) if isinstance(raw, str) else raw
    return validate_config(data)
