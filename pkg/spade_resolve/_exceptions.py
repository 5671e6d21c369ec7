# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
from __future__ import annotations

from typing import Any


class InvalidDimensionError(ValueError):
    """A matrix or mode dimension is too small to be meaningful."""


class ContractViolationError(ValueError):
    """A matrix argument is not square, not finite or not Hermitian."""


class InvalidParameterError(ValueError):
    """A physical or numerical parameter is outside of its allowed range."""


class ModeIndexError(IndexError):
    """A detector mode index is not smaller than the number of modes per axis."""


class ConfigError(ValueError):
    """A run configuration file or command line flag could not be used."""


class QuadratureError(ArithmeticError):
    """Numerical integration did not reach the requested accuracy.

    Attributes:
        estimate: The last value computed before giving up
        error: The last difference between successive node counts
        nodes: The node count per axis of the last estimate
    """

    def __init__(self, message: str, estimate: float, error: float, nodes: int) -> None:
        self.estimate = estimate
        self.error = error
        self.nodes = nodes
        super().__init__(message)


class NoSolutionError(ArithmeticError):
    """The minimal resolvable distance equation has no root in the search window.

    Attributes:
        table: The bracket scan as a list of ``(x, residual)`` pairs
    """

    def __init__(self, message: str, table: list[tuple[float, float]] | None = None) -> None:
        self.table = table or []
        super().__init__(message)


class NoThresholdError(ArithmeticError):
    """SPADE never overtakes direct imaging in the search window.

    Attributes:
        table: The bracket scan as a list of ``(x, spade - di)`` pairs
    """

    def __init__(self, message: str, table: list[tuple[float, float]] | None = None) -> None:
        self.table = table or []
        super().__init__(message)


class UnreachableFractionError(ArithmeticError):
    """The requested fraction of the maximal Fisher information is never reached.

    Attributes:
        achieved: The largest Fisher information found on the scan grid
    """

    def __init__(self, message: str, achieved: Any = None) -> None:
        self.achieved = achieved
        super().__init__(message)


class EmptyEnsembleError(RuntimeError):
    """Every sample of an ensemble failed, so there is nothing to reduce.

    Attributes:
        failed: The number of failed samples
    """

    def __init__(self, message: str, failed: int = 0) -> None:
        self.failed = failed
        super().__init__(message)
