# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Minimal resolvable distance, SPADE vs direct imaging threshold points and the k = x/√p_c analysis."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import bisect

from ._crosstalk import CrosstalkKind, CrosstalkMatrix, sample_crosstalk
from ._data_utils import log_grid
from ._exceptions import (
    InvalidParameterError,
    NoSolutionError,
    NoThresholdError,
    UnreachableFractionError,
)
from ._fisher import spade_fisher_curve
from ._types import FisherCurve, RngLike

logger = logging.getLogger(__name__)

# Grid of k = x / sqrt(p_c) over which the maximal Fisher information is taken.
K_GRID = (0.01, 20.0, 400)


def _check_window(window: tuple[float, float]) -> tuple[float, float]:
    lo, hi = window
    if not (0 < lo < hi and math.isfinite(hi)):
        raise InvalidParameterError(f"Search window must satisfy 0 < lo < hi, got {window}")
    return float(lo), float(hi)


def _evaluate(curve: FisherCurve, x: float) -> float:
    return float(np.asarray(curve(np.array([x])), dtype=np.float64).reshape(-1)[0])


@dataclass(frozen=True)
class MrdQuery:
    """Solve ``2x sqrt(N w²F(x)) = 1`` for the smallest ``x`` in the window.

    This is ``d sqrt(N F(d)) = 1`` with ``d = 2wx``, so the minimal resolvable distance is ``d_min / w = 2x``.
    """

    photon_count: float
    fisher_curve: FisherCurve
    search_window: tuple[float, float] = (1e-6, 1.0)
    scan_points: int = 200
    rtol: float = 1e-6

    def __post_init__(self):
        if not (self.photon_count > 0):
            raise InvalidParameterError(f"Photon count must be positive, got {self.photon_count}")
        _check_window(self.search_window)
        if self.scan_points < 200:
            raise InvalidParameterError(f"Bracket scans use at least 200 points, got {self.scan_points}")

    def residual(self, x: float) -> float:
        return 2.0 * x * math.sqrt(self.photon_count * max(_evaluate(self.fisher_curve, x), 0.0)) - 1.0


@dataclass(frozen=True)
class ThresholdQuery:
    """Find where the SPADE curve overtakes the direct imaging curve."""

    spade_curve: FisherCurve
    di_curve: FisherCurve
    search_window: tuple[float, float]
    scan_points: int = 200
    rtol: float = 1e-4

    def __post_init__(self):
        _check_window(self.search_window)
        if self.scan_points < 2:
            raise InvalidParameterError("Threshold scans need at least two points")

    def difference(self, x: float) -> float:
        return _evaluate(self.spade_curve, x) - _evaluate(self.di_curve, x)


def solve_mrd(q: MrdQuery) -> float:
    """Smallest root ``x*`` of the minimal resolvable distance equation.

    A log-spaced scan finds the first grid point where the residual vanishes or changes sign in
    either direction, and bisection refines that bracket to relative precision ``q.rtol``.

    Args:
        q: The query.

    Returns:
        ``x*``; the minimal resolvable distance is ``2 x* w``.

    Raises:
        NoSolutionError: If the residual never vanishes or changes sign in the window. The scan is attached.
    """
    lo, hi = q.search_window
    grid = log_grid(lo, hi, q.scan_points)
    fisher = np.maximum(np.asarray(q.fisher_curve(grid), dtype=np.float64), 0.0)
    residual = 2.0 * grid * np.sqrt(q.photon_count * fisher) - 1.0
    zeros = np.flatnonzero(residual == 0.0)
    changes = np.flatnonzero(residual[:-1] * residual[1:] < 0)
    if zeros.size == 0 and changes.size == 0:
        raise NoSolutionError(
            f"No minimal resolvable distance for N={q.photon_count:g} in {q.search_window}",
            table=list(zip(grid.tolist(), residual.tolist())),
        )
    if zeros.size and (changes.size == 0 or zeros[0] <= changes[0]):
        return float(grid[zeros[0]])
    i = int(changes[0])
    root = bisect(q.residual, grid[i], grid[i + 1], xtol=1e-300, rtol=q.rtol, maxiter=200)
    logger.debug("MRD root for N=%g at x=%.6g (bracket %d)", q.photon_count, root, i)
    return float(root)


def find_threshold(q: ThresholdQuery) -> float:
    """Smallest ``x`` where ``spade - di`` goes from ``<= 0`` to ``> 0``.

    Returns:
        The threshold ``x_c``, or 0 when SPADE is ahead on the whole window.

    Raises:
        NoThresholdError: If SPADE never overtakes direct imaging. The scan is attached.
    """
    lo, hi = q.search_window
    grid = log_grid(lo, hi, q.scan_points)
    difference = np.asarray(q.spade_curve(grid), dtype=np.float64) - np.asarray(q.di_curve(grid), dtype=np.float64)
    if np.all(difference > 0):
        return 0.0
    crossings = np.flatnonzero((difference[:-1] <= 0) & (difference[1:] > 0))
    if crossings.size == 0:
        raise NoThresholdError(
            f"SPADE does not overtake direct imaging in {q.search_window}",
            table=list(zip(grid.tolist(), difference.tolist())),
        )
    i = int(crossings[0])
    # Keep the bracket invariant f(a) <= 0 < f(b) so an exact zero at a grid point is not skipped
    a, b = float(grid[i]), float(grid[i + 1])
    while b - a > q.rtol * b:
        mid = math.sqrt(a * b)
        if q.difference(mid) > 0:
            b = mid
        else:
            a = mid
    logger.debug("Threshold bracket [%.6g, %.6g]", a, b)
    return 0.5 * (a + b)


def _resolve_crosstalk(
    family: CrosstalkKind | str | CrosstalkMatrix,
    p_c: float,
    rng: RngLike | None,
    D: int,  # noqa: N803
) -> CrosstalkMatrix:
    if isinstance(family, CrosstalkMatrix):
        return family
    return sample_crosstalk(family, D, p_c, rng)


def _k_scan(
    c: CrosstalkMatrix,
    p_c: float,
    nu: float,
    theta: float,
    k_grid: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    if not (0 < p_c < 1):
        raise InvalidParameterError(f"k-ratio analysis needs 0 < p_c < 1, got {p_c}")
    ks = log_grid(*K_GRID) if k_grid is None else np.asarray(k_grid, dtype=np.float64)
    return ks, spade_fisher_curve(c, ks * math.sqrt(p_c), nu, theta)


def k_ratio_to_fraction(
    family: CrosstalkKind | str | CrosstalkMatrix,
    fraction: float,
    p_c: float,
    nu: float,
    theta: float = 0.0,
    rng: RngLike | None = None,
    *,
    D: int = 3,  # noqa: N803
    k_grid: np.ndarray | None = None,
) -> float:
    """Smallest ``k = x/√p_c`` at which ``w²F`` reaches ``fraction`` of its maximum over the k grid.

    Args:
        family: A crosstalk family to sample from, or an already sampled matrix.
        fraction: Target fraction in ``(0, 1)``.
        p_c: Crosstalk strength used for sampling and for the k scale.
        nu: Relative brightness.
        theta: Source axis angle.
        rng: Random stream for the random family.
        D: Modes per axis when sampling.
        k_grid: Override of the default log grid ``k ∈ [0.01, 20]`` with 400 points.

    Raises:
        UnreachableFractionError: If the curve has no positive maximum on the grid.
    """
    if not (0 < fraction < 1):
        raise InvalidParameterError(f"fraction must be in (0, 1), got {fraction}")
    c = _resolve_crosstalk(family, p_c, rng, D)
    ks, fisher = _k_scan(c, p_c, nu, theta, k_grid)
    best = float(np.max(fisher))
    if not (best > 0 and math.isfinite(best)):
        raise UnreachableFractionError(f"No positive Fisher information on the k grid (max {best})", achieved=best)
    reached = np.flatnonzero(fisher >= fraction * best)
    return float(ks[reached[0]])


def fraction_at_k(
    family: CrosstalkKind | str | CrosstalkMatrix,
    k: float,
    p_c: float,
    nu: float,
    theta: float = 0.0,
    rng: RngLike | None = None,
    *,
    D: int = 3,  # noqa: N803
    k_grid: np.ndarray | None = None,
) -> float:
    """``w²F(k√p_c)`` divided by the maximum of ``w²F`` over the k grid."""
    if not (k > 0):
        raise InvalidParameterError(f"k must be positive, got {k}")
    c = _resolve_crosstalk(family, p_c, rng, D)
    _, fisher = _k_scan(c, p_c, nu, theta, k_grid)
    at_k = float(spade_fisher_curve(c, k * math.sqrt(p_c), nu, theta)[0])
    return at_k / float(np.max(fisher))


def constant_curve(value: float) -> Callable[[np.ndarray], np.ndarray]:
    """A Fisher curve that is ``value`` everywhere."""

    def curve(xs: np.ndarray) -> np.ndarray:
        return np.full(np.shape(xs), float(value))

    return curve
