# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Utilities for working with grids, seeds and loosely typed parameter data."""
from __future__ import annotations

from collections.abc import Iterable
from typing import Any

import numpy as np
import yaml

from ._exceptions import InvalidParameterError
from ._types import RngLike


def xdict(*in_dict, **kwargs):
    """Dictionary constructor that ignores None values.

    Args:
        in_dict: A dict to convert. Only one is allowed.
        **kwargs: Keyword arguments to be converted to a dict.

    Returns:
        A dict with None values removed.

    Raises:
        ValueError
            If more than one positional argument is passed, or if both a positional
            argument and keyword arguments are passed.

    Examples:
        >>> xdict(nu=0.7, theta=None)
        {"nu": 0.7}

        >>> xdict({"nu": 0.7, "theta": None})
        {"nu": 0.7}
    """
    if len(in_dict) > 1:
        raise ValueError(f"xdict expected at most 1 positional argument, got {len(in_dict)}")
    if len(in_dict) == 1 and kwargs:
        raise ValueError("xdict expected at most 1 positional argument, or multiple keyword arguments, got both")
    if len(in_dict) == 1:
        [kwargs] = in_dict
    return {k: v for k, v in kwargs.items() if v is not None}


def normalize_key(key: str) -> str:
    """Turn a flag or config key like ``x-min`` into a Python identifier like ``x_min``."""
    return key.strip().lstrip("-").replace("-", "_").lower()


def parse_scalar(text: str) -> Any:
    """Parse a config value the way YAML would parse a flow scalar or sequence.

    Examples:
        >>> parse_scalar("1e-4")
        0.0001

        >>> parse_scalar("[0.9, 0.95]")
        [0.9, 0.95]
    """
    text = text.strip()
    if not text:
        return None
    return _coerce_numbers(yaml.safe_load(text))


def _coerce_numbers(value: Any) -> Any:
    # YAML 1.1 only treats exponents with a dot as floats, so "1e-4" arrives as a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return value
    if isinstance(value, list):
        return [_coerce_numbers(v) for v in value]
    return value


def as_float_list(value: Any) -> list[float]:
    """Coerce a scalar or an iterable of numbers into a list of floats."""
    if value is None:
        return []
    if isinstance(value, (str, bytes)):
        return [float(v) for v in str(value).replace(",", " ").split()]
    if isinstance(value, Iterable):
        return [float(v) for v in value]
    return [float(value)]


def log_grid(lo: float, hi: float, points: int) -> np.ndarray:
    """Logarithmically spaced grid including both end points.

    Raises:
        InvalidParameterError: If the bounds are not positive and increasing or fewer than two points are asked for.
    """
    if not (lo > 0 and hi > lo and np.isfinite(hi)):
        raise InvalidParameterError(f"Grid bounds must satisfy 0 < lo < hi, got lo={lo}, hi={hi}")
    if points < 2:
        raise InvalidParameterError(f"A grid needs at least two points, got {points}")
    return np.geomspace(lo, hi, int(points))


def as_generator(rng: RngLike) -> np.random.Generator:
    """Return a numpy random generator for a generator or an explicit integer seed.

    A seed is always required; ``None`` is refused so that no stream is ever seeded from the clock.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return np.random.default_rng(int(rng))
    raise InvalidParameterError(f"Expected a numpy Generator or an integer seed, got {rng!r}")
