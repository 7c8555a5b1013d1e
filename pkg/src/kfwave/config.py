"""Strict TOML run configuration for the command-line front end.

A run config has an ``[ifs]`` table (``ratios``, ``offsets``, ``weights``,
``boundary``), an optional ``[numerics]`` table (``level``, ``modes``, ``dt``,
``horizon``, ``seed``, ``paths``), an optional command-specific ``[task]``
table and an optional top-level ``output_dir``.  Unknown keys are errors;
relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .measure import Boundary, IfsSpec, validate_ifs

__all__ = ["ConfigError", "RunConfig", "load_config", "OUTPUT_DIR_ENV"]

#: Environment variable naming the default output directory.
OUTPUT_DIR_ENV = "KFWAVE_OUT"

_NUMERICS_DEFAULTS = {
    "level": 8,
    "modes": 0,  # 0 means "full spectrum"
    "dt": 1e-3,
    "horizon": 1.0,
    "seed": 0,
    "paths": 100,
}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _as_float_list(value, key: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in value):
        raise ConfigError(f"key {key!r} must be a non-empty array of numbers")
    return tuple(float(v) for v in value)


def _as_number(value, key: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"key {key!r} must be a number")
    return float(value)


def _as_int(value, key: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"key {key!r} must be an integer")
    return value


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run configuration."""

    ifs: IfsSpec
    level: int
    modes: int | None
    dt: float
    horizon: float
    seed: int
    paths: int
    task: dict
    output_dir: Path
    source: Path | None
    digest: str = field(default="", compare=False)


def _parse_ifs(table: dict) -> IfsSpec:
    allowed = {"ratios", "offsets", "weights", "boundary"}
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown [ifs] keys: {sorted(unknown)}")
    for key in ("ratios", "offsets", "weights"):
        if key not in table:
            raise ConfigError(f"missing [ifs] key {key!r}")
    boundary_raw = table.get("boundary", "neumann")
    try:
        boundary = Boundary(str(boundary_raw).lower())
    except ValueError:
        raise ConfigError(
            f"boundary must be 'neumann' or 'dirichlet', got {boundary_raw!r}"
        ) from None
    spec = IfsSpec(
        _as_float_list(table["ratios"], "ratios"),
        _as_float_list(table["offsets"], "offsets"),
        _as_float_list(table["weights"], "weights"),
        boundary,
    )
    return validate_ifs(spec)


def _parse_numerics(table: dict) -> dict:
    unknown = set(table) - set(_NUMERICS_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown [numerics] keys: {sorted(unknown)}")
    out = dict(_NUMERICS_DEFAULTS)
    out.update(table)
    level = _as_int(out["level"], "level")
    modes = _as_int(out["modes"], "modes")
    if level < 1:
        raise ConfigError("level must be >= 1")
    if modes < 0:
        raise ConfigError("modes must be >= 0 (0 selects the full spectrum)")
    return {
        "level": level,
        "modes": modes if modes > 0 else None,
        "dt": _as_number(out["dt"], "dt"),
        "horizon": _as_number(out["horizon"], "horizon"),
        "seed": _as_int(out["seed"], "seed"),
        "paths": _as_int(out["paths"], "paths"),
    }


def load_config(path: str | Path, *, seed_override: int | None = None,
                out_override: str | None = None) -> RunConfig:
    """Read, validate and freeze a run configuration from a TOML file."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None

    allowed_top = {"ifs", "numerics", "task", "output_dir"}
    unknown = set(raw) - allowed_top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if "ifs" not in raw:
        raise ConfigError("missing [ifs] table")

    ifs = _parse_ifs(raw["ifs"])
    numerics = _parse_numerics(raw.get("numerics", {}))
    if seed_override is not None:
        numerics["seed"] = seed_override
    task = raw.get("task", {})
    if not isinstance(task, dict):
        raise ConfigError("[task] must be a table")

    if out_override is not None:
        output_dir = Path(out_override)
    elif "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ConfigError("output_dir must be a string")
        output_dir = path.parent / raw["output_dir"]
    elif os.environ.get(OUTPUT_DIR_ENV):
        output_dir = Path(os.environ[OUTPUT_DIR_ENV])
    else:
        output_dir = path.parent

    effective = {
        "ifs": {
            "ratios": list(ifs.ratios),
            "offsets": list(ifs.offsets),
            "weights": list(ifs.weights),
            "boundary": ifs.boundary.value,
        },
        "numerics": numerics,
        "task": task,
    }
    digest = hashlib.sha256(
        json.dumps(effective, sort_keys=True).encode()).hexdigest()[:16]
    return RunConfig(ifs=ifs, task=task, output_dir=output_dir, source=path,
                     digest=digest, **numerics)


def require_task_keys(task: dict, allowed: set[str], command: str) -> None:
    """Reject unknown [task] keys for a command."""
    unknown = set(task) - allowed
    if unknown:
        raise ConfigError(
            f"unknown [task] keys for {command!r}: {sorted(unknown)}")
