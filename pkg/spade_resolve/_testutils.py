# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import contextlib
import os
from collections.abc import Generator
from typing import Callable, Optional


@contextlib.contextmanager
def set_env(**environ: Optional[str]) -> Generator[None, None, None]:
    """Temporarily set or unset process environment variables.

    Variables given as ``None`` are removed for the duration of the block. The original
    environment is restored on exit.

    Args:
        **environ: Variables to set, or to unset when ``None``.

    Yields:
        None

    Examples:
        >>> with set_env(SPADE_RESOLVE_WORKERS="4"):
        ...     os.environ["SPADE_RESOLVE_WORKERS"]
        '4'

        >>> with set_env(SPADE_RESOLVE_WORKERS=None):
        ...     "SPADE_RESOLVE_WORKERS" in os.environ
        False
    """
    old_environ = dict(os.environ)
    for key, value in environ.items():
        if value is None:
            os.environ.pop(key, None)
        else:
            os.environ[key] = value
    try:
        yield
    finally:
        os.environ.clear()
        os.environ.update(old_environ)


def central_difference(func: Callable[[float], float], x: float, h: float = 1e-6) -> float:
    """Second-order central difference of a scalar function, used as a derivative oracle."""
    return (func(x + h) - func(x - h)) / (2.0 * h)
