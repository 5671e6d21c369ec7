# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Optical forward model for two incoherent Gaussian sources measured in Hermite-Gauss modes.

All separations are the dimensionless half-separation ``x = d / (2w)``.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from cachetools import LRUCache, cached

from ._crosstalk import CrosstalkMatrix
from ._exceptions import InvalidParameterError, ModeIndexError
from ._types import XValues

TWO_PI = 2.0 * math.pi


def canonicalize(theta: float, nu: float) -> tuple[float, float]:
    """Map ``(θ, ν)`` with ``ν < 1/2`` onto the equivalent ``(θ + π, 1 - ν)`` and wrap ``θ`` into ``[0, 2π)``."""
    if nu < 0.5:
        theta, nu = theta + math.pi, 1.0 - nu
    return math.fmod(math.fmod(theta, TWO_PI) + TWO_PI, TWO_PI), nu


@dataclass(frozen=True)
class SourceGeometry:
    """Two sources at ``±x`` along the direction ``θ``, the one at ``+x`` carrying the fraction ``ν`` of the light.

    ``ν`` below one half is accepted and canonicalised so that ``1/2 <= ν <= 1`` always holds.
    """

    x: float
    theta: float = 0.0
    nu: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.x) and self.x >= 0):
            raise InvalidParameterError(f"Separation must be finite and nonnegative, got x={self.x}")
        if not math.isfinite(self.theta):
            raise InvalidParameterError(f"theta must be finite, got {self.theta}")
        if not (0.0 <= self.nu <= 1.0):
            raise InvalidParameterError(f"Relative brightness must be in [0, 1], got nu={self.nu}")
        theta, nu = canonicalize(float(self.theta), float(self.nu))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "nu", nu)


@dataclass(frozen=True, eq=False)
class DetectionModel:
    geometry: SourceGeometry
    crosstalk: CrosstalkMatrix

    @property
    def D(self) -> int:  # noqa: N802
        return self.crosstalk.modes_per_axis

    def _check_mode(self, n: int, m: int) -> int:
        if not (0 <= n < self.D and 0 <= m < self.D):
            raise ModeIndexError(f"Mode ({n}, {m}) is outside of the {self.D}x{self.D} detector")
        return n * self.D + m

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Detector coefficients ``f±_nm`` for every mode, flattened as ``n * D + m``."""
        g = self.geometry
        beta = beta_table(g.x, g.theta, self.D)[:, 0, :]
        f = beta @ self.crosstalk.matrix.T
        return f[0], f[1]

    def probabilities(self) -> np.ndarray:
        """Detection probabilities of every mode."""
        g = self.geometry
        return detection_table(self.crosstalk.matrix, g.x, g.nu, g.theta, self.D)[0][0]

    def probabilities_dx(self) -> np.ndarray:
        """``∂p/∂x`` of every mode."""
        g = self.geometry
        return detection_table(self.crosstalk.matrix, g.x, g.nu, g.theta, self.D)[1][0]


@cached(LRUCache(maxsize=16), lock=threading.Lock())
def _mode_constants(D: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:  # noqa: N803
    """Per flattened mode: ``k``, ``l`` and ``1/sqrt(k! l!)``."""
    k, l = np.divmod(np.arange(D * D), D)  # noqa: E741
    norm = np.array([1.0 / math.sqrt(math.factorial(a) * math.factorial(b)) for a, b in zip(k, l)])
    return k, l, norm


def beta_table(x: XValues, theta: float, D: int) -> np.ndarray:  # noqa: N803
    """Overlaps ``β±_kl`` for all modes.

    Returns:
        Array of shape ``(2, len(x), D*D)``; index 0 is the ``+`` source and 1 the ``-`` source.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    k, l, norm = _mode_constants(D)  # noqa: E741
    s = k + l
    angular = norm * math.cos(theta) ** k * math.sin(theta) ** l
    plus = xs[:, None] ** s * angular * np.exp(-0.5 * xs**2)[:, None]
    return np.stack([plus, plus * (-1.0) ** s])


def beta_dx_table(x: XValues, theta: float, D: int) -> np.ndarray:  # noqa: N803
    """``∂β±_kl/∂x`` for all modes, same layout as :func:`beta_table`.

    Uses ``(s x^(s-1) - x^(s+1)) e^(-x²/2)`` with ``s = k + l``; the first term is absent for ``s = 0``.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    k, l, norm = _mode_constants(D)  # noqa: E741
    s = k + l
    angular = norm * math.cos(theta) ** k * math.sin(theta) ** l
    lead = np.where(s > 0, s * xs[:, None] ** np.maximum(s - 1, 0), 0.0)
    plus = (lead - xs[:, None] ** (s + 1)) * angular * np.exp(-0.5 * xs**2)[:, None]
    return np.stack([plus, plus * (-1.0) ** s])


def detection_table(
    matrix: np.ndarray,
    x: XValues,
    nu: float,
    theta: float,
    D: int,  # noqa: N803
) -> tuple[np.ndarray, np.ndarray]:
    """Probabilities and their x-derivatives for every mode and separation.

    ``matrix`` may be a single ``(D², D²)`` crosstalk matrix or a stack ``(M, D², D²)``.

    Returns:
        ``(p, dp)`` of shape ``(len(x), D²)`` or ``(M, len(x), D²)`` for stacks.
    """
    beta = beta_table(x, theta, D)
    dbeta = beta_dx_table(x, theta, D)
    # f_{nm} = sum_kl c_{nm,kl} beta_kl, as batched products against c transposed
    ct = np.swapaxes(np.asarray(matrix), -1, -2)[..., None, :, :]
    f = beta @ ct
    df = dbeta @ ct
    fp, fm = f[..., 0, :, :], f[..., 1, :, :]
    dfp, dfm = df[..., 0, :, :], df[..., 1, :, :]
    p = nu * np.abs(fp) ** 2 + (1.0 - nu) * np.abs(fm) ** 2
    dp = 2.0 * nu * np.real(np.conj(fp) * dfp) + 2.0 * (1.0 - nu) * np.real(np.conj(fm) * dfm)
    return p, dp


def _sign_index(sign: int) -> int:
    if sign not in (1, -1):
        raise InvalidParameterError(f"sign must be +1 or -1, got {sign}")
    return 0 if sign == 1 else 1


def _single_mode(k: int, l: int) -> tuple[int, int, float]:  # noqa: E741
    if k < 0 or l < 0:
        raise ModeIndexError(f"Mode indices must be nonnegative, got ({k}, {l})")
    return k, l, 1.0 / math.sqrt(math.factorial(k) * math.factorial(l))


def beta(sign: int, k: int, l: int, g: SourceGeometry) -> float:  # noqa: E741
    """Overlap of source ``sign`` with mode ``(k, l)``: ``(±x)^(k+l) cos^k θ sin^l θ e^(-x²/2) / sqrt(k! l!)``.

    Examples:
        >>> round(beta(-1, 1, 0, SourceGeometry(x=0.2)), 5)
        -0.19604
    """
    k, l, norm = _single_mode(k, l)  # noqa: E741
    _sign_index(sign)
    s = k + l
    value = norm * (sign * g.x) ** s * math.cos(g.theta) ** k * math.sin(g.theta) ** l
    return value * math.exp(-0.5 * g.x**2)


def beta_dx(sign: int, k: int, l: int, g: SourceGeometry) -> float:  # noqa: E741
    """Analytic ``∂β/∂x`` of :func:`beta`, finite at ``x = 0``."""
    k, l, norm = _single_mode(k, l)  # noqa: E741
    _sign_index(sign)
    s = k + l
    lead = s * g.x ** (s - 1) if s > 0 else 0.0
    return sign**s * norm * math.cos(g.theta) ** k * math.sin(g.theta) ** l * (lead - g.x ** (s + 1)) * math.exp(
        -0.5 * g.x**2
    )


def detector_coefficient(sign: int, n: int, m: int, model: DetectionModel) -> complex:
    """``f±_nm = Σ_kl c_{nm,kl} β±_kl``, the amplitude of source ``sign`` seen by detector ``(n, m)``."""
    row = model._check_mode(n, m)
    plus, minus = model.coefficients()
    return complex((plus if _sign_index(sign) == 0 else minus)[row])


def detection_probability(n: int, m: int, model: DetectionModel) -> float:
    """``p(nm) = ν |f+_nm|² + (1 - ν) |f-_nm|²``."""
    row = model._check_mode(n, m)
    return float(model.probabilities()[row])


def detection_probability_dx(n: int, m: int, model: DetectionModel) -> float:
    """Analytic ``∂p(nm)/∂x``."""
    row = model._check_mode(n, m)
    return float(model.probabilities_dx()[row])
