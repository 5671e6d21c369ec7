# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Run configuration: command defaults, ``key=value`` or YAML config files, environment and flags."""
from __future__ import annotations

import math
import os
import pathlib
from collections.abc import Mapping
from typing import Any, Callable

import anyio
import yaml
from box import Box

from ._data_utils import as_float_list, normalize_key, parse_scalar, xdict
from ._exceptions import ConfigError
from ._types import PathType

WORKERS_ENV = "SPADE_RESOLVE_WORKERS"
LOG_LEVEL_ENV = "SPADE_RESOLVE_LOG_LEVEL"

COMMANDS = ("fisher-scan", "mrd-scan", "crosstalk-stats", "optimal-region", "threshold-scan")

COMMON_DEFAULTS: dict[str, Any] = {
    "seed": 0,
    "workers": 1,
    "out": None,
    "format": "csv",
    "log_level": "WARNING",
    "dump_samples": None,
}

COMMAND_DEFAULTS: dict[str, dict[str, Any]] = {
    "fisher-scan": {
        "nu": 0.7,
        "theta": 0.0,
        "pc": 0.0017,
        "dim": 3,
        "samples": 500,
        "x_min": 1e-4,
        "x_max": 0.3,
        "x_points": 60,
    },
    "mrd-scan": {
        "nu": None,
        "nu_min": 0.5,
        "nu_max": 1.0,
        "nu_points": 11,
        "photons": [1e2, 1e4, 1e6],
        "pc": 0.01,
        "theta": 0.0,
        "dim": 3,
        "samples": 2000,
        "x_min": 1e-6,
        "x_max": 1.0,
        "average": "fisher",
        "ideal": False,
    },
    "crosstalk-stats": {
        "mu": [0.02, 0.05, 0.1, 0.2],
        "dim": 2,
        "samples": 500,
    },
    "optimal-region": {
        "pc": [1e-4, 1e-3, 1e-2],
        "fraction": [0.9, 0.95],
        "samples": 200,
        "dim": 3,
        "nu": 0.6,
        "randomize_nu": True,
        "theta": 0.0,
        "k_check": 3.0,
        "identity": False,
    },
    "threshold-scan": {
        "nu": [0.5, 0.55, 0.6, 0.7],
        "pc": [0.01],
        "mu_interval": None,
        "samples": 200,
        "dim": 3,
        "theta": 0.0,
        "k_min": 1e-3,
        "k_max": 10.0,
        "x_max": 0.3,
    },
}


def _fail(key: str, message: str) -> ConfigError:
    return ConfigError(f"Invalid value for {key!r}: {message}")


def _number(key: str, value: Any, check: Callable[[float], bool] | None = None, text: str = "") -> float:
    try:
        number = float(value)
    except (TypeError, ValueError) as e:
        raise _fail(key, f"expected a number, got {value!r}") from e
    if not math.isfinite(number) or (check and not check(number)):
        raise _fail(key, f"{number} {text}".strip())
    return number


def _integer(key: str, value: Any, minimum: int, maximum: int | None = None) -> int:
    if isinstance(value, bool) or float(_number(key, value)) != int(float(value)):
        raise _fail(key, f"expected an integer, got {value!r}")
    number = int(float(value)) if not isinstance(value, int) else value
    if number < minimum or (maximum is not None and number >= maximum):
        raise _fail(key, f"{number} is out of range")
    return number


def _numbers(key: str, value: Any, check: Callable[[float], bool], text: str) -> list[float]:
    try:
        values = as_float_list(value)
    except (TypeError, ValueError) as e:
        raise _fail(key, f"expected a list of numbers, got {value!r}") from e
    if not values:
        raise _fail(key, "expected at least one value")
    return [_number(key, v, check, text) for v in values]


def _boolean(key: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "yes", "on", "1", "false", "no", "off", "0"):
        return value.lower() in ("true", "yes", "on", "1")
    raise _fail(key, f"expected a boolean, got {value!r}")


def _unit(v: float) -> bool:
    return 0.0 <= v <= 1.0


def _strength(v: float) -> bool:
    return 0.0 <= v < 1.0


def _positive(v: float) -> bool:
    return v > 0


# Each validator returns the cleaned value for its key.
VALIDATORS: dict[str, Callable[[str, Any], Any]] = {
    "seed": lambda k, v: _integer(k, v, 0, 2**64),
    "workers": lambda k, v: _integer(k, v, 1),
    "out": lambda k, v: None if v is None else str(v),
    "dump_samples": lambda k, v: None if v is None else str(v),
    "theta": lambda k, v: _number(k, v),
    "dim": lambda k, v: _integer(k, v, 2),
    "samples": lambda k, v: _integer(k, v, 1),
    "x_min": lambda k, v: _number(k, v, _positive, "must be positive"),
    "x_max": lambda k, v: _number(k, v, _positive, "must be positive"),
    "x_points": lambda k, v: _integer(k, v, 2),
    "nu_min": lambda k, v: _number(k, v, _unit, "must be in [0, 1]"),
    "nu_max": lambda k, v: _number(k, v, _unit, "must be in [0, 1]"),
    "nu_points": lambda k, v: _integer(k, v, 1),
    "photons": lambda k, v: _numbers(k, v, _positive, "must be positive"),
    "mu": lambda k, v: _numbers(k, v, lambda m: m >= 0, "must be nonnegative"),
    "fraction": lambda k, v: _numbers(k, v, lambda f: 0 < f < 1, "must be in (0, 1)"),
    "k_check": lambda k, v: _number(k, v, _positive, "must be positive"),
    "k_min": lambda k, v: _number(k, v, _positive, "must be positive"),
    "k_max": lambda k, v: _number(k, v, _positive, "must be positive"),
    "ideal": _boolean,
    "identity": _boolean,
    "randomize_nu": _boolean,
}


def _validate(command: str, params: dict[str, Any]) -> dict[str, Any]:
    clean: dict[str, Any] = {}
    for key, value in params.items():
        if key == "format":
            if value not in ("csv", "json"):
                raise _fail(key, f"expected csv or json, got {value!r}")
            clean[key] = value
        elif key == "log_level":
            level = str(value).upper()
            if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
                raise _fail(key, f"unknown log level {value!r}")
            clean[key] = level
        elif key == "average":
            if value not in ("fisher", "mrd"):
                raise _fail(key, f"expected fisher or mrd, got {value!r}")
            clean[key] = value
        elif key == "nu":
            if value is None:
                clean[key] = None
            elif command in ("fisher-scan", "optimal-region"):
                clean[key] = _number(key, value, _unit, "must be in [0, 1]")
            else:
                clean[key] = _numbers(key, value, _unit, "must be in [0, 1]")
        elif key == "pc":
            if command in ("fisher-scan", "mrd-scan"):
                clean[key] = _number(key, value, _strength, "must be in [0, 1)")
            else:
                clean[key] = _numbers(key, value, lambda p: 0 < p < 1, "must be in (0, 1)")
        elif key == "mu_interval":
            if value is None:
                clean[key] = None
            else:
                bounds = _numbers(key, value, _positive, "must be positive")
                if len(bounds) != 2 or bounds[0] >= bounds[1]:
                    raise _fail(key, f"expected two increasing bounds, got {value!r}")
                clean[key] = bounds
        else:
            clean[key] = VALIDATORS[key](key, value)
    for lo, hi in (("x_min", "x_max"), ("nu_min", "nu_max"), ("k_min", "k_max")):
        if lo in clean and hi in clean and not clean[lo] < clean[hi]:
            raise ConfigError(f"{lo} must be smaller than {hi}, got {clean[lo]} and {clean[hi]}")
    return clean


def parse_key_value(text: str) -> dict[str, Any]:
    """Parse flat ``key = value`` lines. Blank lines and ``#`` comments are skipped.

    Examples:
        >>> parse_key_value("nu = 0.7\\nphotons = [1e2, 1e4]")
        {"nu": 0.7, "photons": [100.0, 10000.0]}
    """
    data: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"Line {lineno} is not of the form key=value: {raw!r}")
        key, value = line.split("=", 1)
        try:
            data[normalize_key(key)] = parse_scalar(value)
        except yaml.YAMLError as e:
            raise ConfigError(f"Line {lineno} has an unparsable value: {value.strip()!r}") from e
    return data


async def read_config_file(path: PathType) -> dict[str, Any]:
    """Read a ``key=value`` file, or a YAML mapping when the suffix is ``.yaml``/``.yml``."""
    path = pathlib.Path(path).expanduser()
    try:
        async with await anyio.open_file(path, encoding="utf-8") as fh:
            text = await fh.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    if path.suffix.lower() in (".yaml", ".yml"):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
        if not isinstance(data, Mapping):
            raise ConfigError(f"Config file {path} must contain a mapping")
        return {normalize_key(str(k)): parse_scalar(v) if isinstance(v, str) else v for k, v in data.items()}
    return parse_key_value(text)


def _environment(environ: Mapping[str, str]) -> dict[str, Any]:
    return xdict(
        workers=parse_scalar(environ[WORKERS_ENV]) if environ.get(WORKERS_ENV) else None,
        log_level=environ.get(LOG_LEVEL_ENV) or None,
    )


class RunConfig:
    """The fully resolved parameters of one command run.

    Parameters are exposed as a frozen :class:`box.Box` so they read as attributes,
    ``config.params.x_min``, and are echoed verbatim into output metadata.
    """

    def __init__(self, command: str, params: Mapping[str, Any]) -> None:
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command {command!r}, expected one of {', '.join(COMMANDS)}")
        self.command = command
        self.params = Box(dict(params), frozen_box=True)

    def __repr__(self) -> str:
        return f"<RunConfig {self.command} {self.to_dict()}>"

    @property
    def seed(self) -> int:
        return self.params.seed

    @property
    def workers(self) -> int:
        return self.params.workers

    @property
    def out(self) -> str | None:
        return self.params.out

    @property
    def format(self) -> str:
        return self.params.format

    def to_dict(self) -> dict[str, Any]:
        return self.params.to_dict()

    @classmethod
    def resolve(
        cls,
        command: str,
        file_params: Mapping[str, Any] | None = None,
        overrides: Mapping[str, Any] | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> RunConfig:
        """Merge defaults, environment, file parameters and overrides, in increasing precedence, and validate.

        Raises:
            ConfigError: On unknown keys or invalid values.
        """
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command {command!r}, expected one of {', '.join(COMMANDS)}")
        params: dict[str, Any] = {**COMMON_DEFAULTS, **COMMAND_DEFAULTS[command]}
        layers = (
            _environment(os.environ if environ is None else environ),
            dict(file_params or {}),
            xdict({normalize_key(k): v for k, v in (overrides or {}).items()}),
        )
        for layer in layers:
            unknown = sorted(set(layer) - set(params))
            if unknown:
                raise ConfigError(f"Unknown parameter(s) for {command}: {', '.join(unknown)}")
            params.update(layer)
        return cls(command, _validate(command, params))


async def load_run_config(
    command: str,
    path: PathType | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Build a :class:`RunConfig` for ``command``, reading ``path`` when given."""
    file_params = await read_config_file(path) if path else None
    return RunConfig.resolve(command, file_params, overrides, environ)
