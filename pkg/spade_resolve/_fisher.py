# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Fisher information per photon for SPADE under crosstalk and for ideal direct imaging.

Every public value is ``w²F`` for the full separation ``d``, which equals ``F_x / 4`` for ``x = d / (2w)``.
"""
from __future__ import annotations

import enum
import logging
import math
import threading
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from cachetools import LRUCache, cached

from ._crosstalk import CrosstalkMatrix, SphereVector, identity_crosstalk
from ._exceptions import InvalidParameterError, QuadratureError
from ._photonics import DetectionModel, SourceGeometry, canonicalize, detection_table
from ._types import XValues

logger = logging.getLogger(__name__)

# Mode terms with a probability at or below this are left out of the Fisher sum.
ZERO_PROBABILITY_FLOOR = 1e-300


class FisherMethod(str, enum.Enum):
    SPADE = "spade"
    DIRECT_IMAGING = "direct_imaging"
    IDEAL_REFERENCE = "ideal_reference"


@dataclass(frozen=True, eq=False)
class FisherResult:
    """Fisher information per photon at one separation.

    Attributes:
        w2F: ``w²F``, dimensionless.
        x: The half-separation it was evaluated at.
        method: Which measurement it describes.
        terms: Per-mode contributions for SPADE, flattened as ``n * D + m``; they sum to ``w2F``.
        dropped_modes: Flattened indices of modes left out at zero probability.
        error_estimate: Absolute quadrature error estimate for direct imaging.
        nodes: Quadrature nodes per axis used for direct imaging.
    """

    w2F: float  # noqa: N815
    x: float
    method: FisherMethod
    terms: np.ndarray | None = field(default=None, repr=False)
    dropped_modes: tuple[int, ...] = ()
    error_estimate: float | None = None
    nodes: int | None = None

    @property
    def relative_error(self) -> float | None:
        if self.error_estimate is None:
            return None
        return self.error_estimate / abs(self.w2F) if self.w2F else self.error_estimate

    def __float__(self) -> float:
        return self.w2F


def _fisher_terms(p: np.ndarray, dp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = p > ZERO_PROBABILITY_FLOOR
    terms = np.where(mask, 0.25 * dp * dp / np.where(mask, p, 1.0), 0.0)
    return terms, mask


def spade_fisher(model: DetectionModel) -> FisherResult:
    """SPADE Fisher information ``(1/4) Σ_nm (∂p/∂x)² / p`` of a detection model.

    Modes whose probability is at most :data:`ZERO_PROBABILITY_FLOOR` are dropped; this only
    happens at isolated points such as ``x = 0`` without crosstalk.

    Args:
        model: The geometry and crosstalk to evaluate.

    Returns:
        The result with per-mode ``terms``.

    Examples:
        >>> from spade_resolve import SourceGeometry, DetectionModel, identity_crosstalk
        >>> model = DetectionModel(SourceGeometry(x=0.1, nu=0.7), identity_crosstalk(3))
        >>> round(spade_fisher(model).w2F, 3)
        1.0
    """
    g = model.geometry
    p, dp = detection_table(model.crosstalk.matrix, g.x, g.nu, g.theta, model.D)
    terms, mask = _fisher_terms(p[0], dp[0])
    dropped = tuple(int(i) for i in np.flatnonzero(~mask))
    if dropped:
        logger.debug("Dropped %d zero-probability modes at x=%g: %s", len(dropped), g.x, dropped)
    return FisherResult(
        w2F=float(terms.sum()),
        x=g.x,
        method=FisherMethod.SPADE,
        terms=terms,
        dropped_modes=dropped,
    )


def ideal_fisher(g: SourceGeometry, D: int = 3) -> FisherResult:  # noqa: N803
    """SPADE without crosstalk, the reference that tends to ``w²F = 1``."""
    result = spade_fisher(DetectionModel(g, identity_crosstalk(D)))
    return FisherResult(
        w2F=result.w2F,
        x=result.x,
        method=FisherMethod.IDEAL_REFERENCE,
        terms=result.terms,
        dropped_modes=result.dropped_modes,
    )


def spade_fisher_curve(
    crosstalk: CrosstalkMatrix | npt.ArrayLike,
    xs: XValues,
    nu: float,
    theta: float = 0.0,
) -> np.ndarray:
    """Vectorised SPADE ``w²F`` over a grid of separations.

    Args:
        crosstalk: A crosstalk matrix, a raw ``(D², D²)`` array or a stack ``(M, D², D²)``.
        xs: Half-separations.
        nu: Relative brightness, canonicalised like :class:`SourceGeometry`.
        theta: Source axis angle.

    Returns:
        ``w²F`` with shape ``(len(xs),)`` or ``(M, len(xs))`` for stacks.
    """
    matrix = crosstalk.matrix if isinstance(crosstalk, CrosstalkMatrix) else np.asarray(crosstalk, dtype=np.complex128)
    side = matrix.shape[-1]
    D = math.isqrt(side)  # noqa: N806
    if D * D != side or matrix.shape[-2] != side:
        raise InvalidParameterError(f"Crosstalk side must be a square number, got shape {matrix.shape}")
    if not (0.0 <= nu <= 1.0):
        raise InvalidParameterError(f"Relative brightness must be in [0, 1], got nu={nu}")
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise InvalidParameterError("Separations must be finite and nonnegative")
    theta, nu = canonicalize(theta, nu)
    p, dp = detection_table(matrix, xs, nu, theta, D)
    terms, _ = _fisher_terms(p, dp)
    return terms.sum(axis=-1)


@dataclass(frozen=True)
class QuadratureSettings:
    """Tensor Gauss-Hermite settings for direct imaging.

    The node count per axis starts at ``initial_nodes`` and doubles until two successive estimates differ
    by at most ``max(rtol * |value|, atol)``.
    """

    initial_nodes: int = 80
    rtol: float = 1e-6
    atol: float = 1e-12
    max_nodes: int = 1280

    def __post_init__(self):
        if self.initial_nodes < 80:
            raise InvalidParameterError(f"Use at least 80 nodes per axis, got {self.initial_nodes}")
        if self.max_nodes < 2 * self.initial_nodes:
            raise InvalidParameterError("max_nodes must allow at least one doubling of initial_nodes")
        if self.rtol < 0 or self.atol < 0:
            raise InvalidParameterError("Tolerances must be nonnegative")


@cached(LRUCache(maxsize=16), lock=threading.Lock())
def _hermgauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.hermite.hermgauss(n)
    with np.errstate(divide="ignore"):
        log_weights = np.log(weights)
    nodes.setflags(write=False)
    log_weights.setflags(write=False)
    return nodes, log_weights


def _di_estimate(x: float, nu: float, theta: float, n: int) -> float:
    """One tensor Gauss-Hermite estimate of ``w²F_DI`` with ``n`` nodes per axis.

    In units of ``w`` the intensity is ``p(ρ) = (2/π)[ν e^(-2|ρ-xe|²) + (1-ν) e^(-2|ρ+xe|²)]``.
    Substituting ``ρ = t/√2`` leaves a Hermite weight ``e^(-|t|²)``; the remaining exponentials are
    rescaled by their largest exponent so nothing overflows.
    """
    t, log_w = _hermgauss(n)
    s = (t[:, None] * math.cos(theta) + t[None, :] * math.sin(theta)) / math.sqrt(2.0)
    a = 4.0 * x * s
    peak = np.abs(a)
    plus = np.exp(a - peak)
    minus = np.exp(-a - peak)
    density = nu * plus + (1.0 - nu) * minus
    slope = 4.0 * (nu * (s - x) * plus - (1.0 - nu) * (s + x) * minus)
    scale = np.exp(log_w[:, None] + log_w[None, :] + peak - 2.0 * x * x)
    ok = density > 0
    integrand = np.where(ok, scale * slope * slope / np.where(ok, density, 1.0), 0.0)
    # F_x = (1/π) Σ w_i w_j slope² / density and w²F = F_x / 4
    return float(integrand.sum() / (4.0 * math.pi))


@cached(LRUCache(maxsize=4096), lock=threading.Lock())
def _di_converged(x: float, nu: float, theta: float, settings: QuadratureSettings) -> tuple[float, float, int]:
    n = settings.initial_nodes
    previous = _di_estimate(x, nu, theta, n)
    while 2 * n <= settings.max_nodes:
        n *= 2
        current = _di_estimate(x, nu, theta, n)
        error = abs(current - previous)
        if error <= max(settings.rtol * abs(current), settings.atol):
            logger.debug("DI quadrature converged at x=%g with %d nodes (error %.2e)", x, n, error)
            return current, error, n
        previous = current
    raise QuadratureError(
        f"Direct imaging quadrature did not converge at x={x} within {settings.max_nodes} nodes",
        estimate=current,
        error=error,
        nodes=n,
    )


def di_fisher(g: SourceGeometry, quad: QuadratureSettings | None = None) -> FisherResult:
    """Fisher information of ideal direct imaging by 2-D Gauss-Hermite quadrature.

    Args:
        g: Source geometry.
        quad: Quadrature settings, defaults to :class:`QuadratureSettings`.

    Returns:
        The result with ``error_estimate`` and ``nodes`` filled in.

    Raises:
        QuadratureError: If successive estimates never agree within the tolerances.
    """
    quad = quad or QuadratureSettings()
    value, error, nodes = _di_converged(g.x, g.nu, g.theta, quad)
    return FisherResult(
        w2F=value,
        x=g.x,
        method=FisherMethod.DIRECT_IMAGING,
        error_estimate=error,
        nodes=nodes,
    )


def di_fisher_curve(xs: XValues, nu: float, theta: float = 0.0, quad: QuadratureSettings | None = None) -> np.ndarray:
    """Direct imaging ``w²F`` over a grid of separations."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    return np.array([di_fisher(SourceGeometry(float(x), theta, nu), quad).w2F for x in xs])


def di_asymptote(nu: float) -> float:
    """Small-separation limit of direct imaging, ``(2ν - 1)²``."""
    return (2.0 * nu - 1.0) ** 2


def _check_nu(nu: float) -> float:
    if not (0.5 <= nu <= 1.0):
        raise InvalidParameterError(f"Relative brightness must be in [1/2, 1], got nu={nu}")
    return float(nu)


def asymptotic_q0_d2(lam: SphereVector | npt.ArrayLike, mu: float, nu: float, theta: float) -> float:
    """First-order-in-``μ`` closed form for the ``x → 0`` SPADE limit with ``D = 2``.

    The 15 components use the :func:`gellmann_basis` ordering, so ``lam[0]``/``lam[6]`` are the
    symmetric/antisymmetric ``00-01`` couplings and ``lam[1]``/``lam[7]`` the ``00-10`` ones.

    Raises:
        InvalidParameterError: If ``lam`` does not have 15 components.
    """
    alpha = np.asarray(lam, dtype=np.float64)
    if alpha.shape != (15,):
        raise InvalidParameterError(f"D=2 crosstalk directions have 15 components, got shape {alpha.shape}")
    n = float(np.linalg.norm(alpha))
    a1, a2, a7, a8 = alpha[0], alpha[1], alpha[6], alpha[7]
    a13, a14, a15 = alpha[12], alpha[13], alpha[14]
    sin2, cos2 = math.sin(theta) ** 2, math.cos(theta) ** 2
    sin_part = 36 * n**2 * a7**2 + 12 * mu * n * a7 * a1 * (-6 * a13 + 2 * math.sqrt(3) * a14 + math.sqrt(6) * a15)
    cos_part = 36 * n**2 * a8**2 + 12 * math.sqrt(3) * mu * n * a8 * a2 * (-4 * a14 + math.sqrt(2) * a15)
    total = 0.0
    if a1**2 + a7**2 > 0:
        total += sin2 * sin_part / (a1**2 + a7**2)
    if a2**2 + a8**2 > 0:
        total += cos2 * cos_part / (a2**2 + a8**2)
    return float(di_asymptote(nu) * total / (36 * n**2))


def q0_limit(crosstalk: CrosstalkMatrix, nu: float, theta: float) -> float:
    """Exact ``x → 0`` limit of SPADE ``w²F`` for any crosstalk matrix.

    With ``g_nm = c_{nm,10} cos θ + c_{nm,01} sin θ`` each mode contributes
    ``(2ν-1)² Re(c*_{nm,00} g_nm)² / |c_{nm,00}|²``, or ``|g_nm|²`` when ``c_{nm,00} = 0``.
    """
    theta, nu = canonicalize(theta, nu)
    c = crosstalk.matrix
    D = crosstalk.modes_per_axis  # noqa: N806
    c00 = c[:, 0]
    g = c[:, D] * math.cos(theta) + c[:, 1] * math.sin(theta)
    weight = np.abs(c00) ** 2
    coupled = weight > ZERO_PROBABILITY_FLOOR
    terms = np.where(
        coupled,
        di_asymptote(nu) * np.real(np.conj(c00) * g) ** 2 / np.where(coupled, weight, 1.0),
        np.abs(g) ** 2,
    )
    return float(terms.sum())


def asymptotic_q0_ensemble_stats(nu: float, theta: float) -> tuple[float, float]:
    """Mean and standard deviation of the ``x → 0`` limit over generic weak crosstalk.

    Returns:
        ``((2ν-1)²/2, (2ν-1)² sqrt((3 + cos 4θ)/2) / 4)``
    """
    q = di_asymptote(_check_nu(nu))
    return 0.5 * q, 0.25 * q * math.sqrt((3.0 + math.cos(4.0 * theta)) / 2.0)


def asymptotic_band(nu: float, theta: float) -> tuple[float, float]:
    """The one-standard-deviation band around the ensemble mean of the ``x → 0`` limit."""
    mean, std = asymptotic_q0_ensemble_stats(nu, theta)
    return mean - std, mean + std


def uniform_q_coefficients(nu: float, theta: float, p_c: float, *, printed: bool = False) -> tuple[float, float, float]:
    """Small-``x`` coefficients ``w²F ≈ q0 + q1 x + q2 x²`` for uniform crosstalk.

    ``q1`` is ``8ν(1-ν)(2ν-1)(sin³θ + cos³θ)/√p_c``, the value that follows from expanding the
    two-axis leading form of :func:`uniform_fisher_leading`. ``printed=True`` returns a prefactor
    of 2 instead of 8, as it is sometimes quoted.

    Raises:
        InvalidParameterError: If ``p_c`` is not in ``(0, 1)`` or ``ν`` not in ``[1/2, 1]``.
    """
    nu = _check_nu(nu)
    if not (0.0 < p_c < 1.0):
        raise InvalidParameterError(f"Uniform coefficients need 0 < p_c < 1, got {p_c}")
    q0 = di_asymptote(nu)
    prefactor = 2.0 if printed else 8.0
    q1 = prefactor * nu * (1 - nu) * (2 * nu - 1) * (math.sin(theta) ** 3 + math.cos(theta) ** 3) / math.sqrt(p_c)
    q2 = -nu * (1 - nu) * (4 * nu - 1) * (4 * nu - 3) * (3 + math.cos(4 * theta)) / p_c
    return q0, q1, q2


def uniform_fisher_leading(x: XValues, nu: float, theta: float, p_c: float) -> np.ndarray:
    """Leading-order uniform-crosstalk ``w²F`` valid in both regimes.

    ``Σ_a a² (ν'√p_c + x a)² / (p_c + 2ν'√p_c x a + x² a²)`` over ``a ∈ {cos θ, sin θ}``, ``ν' = 2ν - 1``.
    """
    xs = np.asarray(x, dtype=np.float64)
    root = math.sqrt(p_c)
    nup = 2.0 * nu - 1.0
    total = np.zeros_like(xs)
    for a in (math.cos(theta), math.sin(theta)):
        numerator = (nup * root + xs * a) ** 2
        denominator = p_c + 2 * nup * root * xs * a + (xs * a) ** 2
        ok = denominator > 0
        total = total + a * a * np.where(ok, numerator / np.where(ok, denominator, 1.0), 0.0)
    return total


def uniform_p10_approx(x: XValues, nu: float, theta: float, p_c: float) -> np.ndarray:
    """Small-``x`` approximation ``cos²θ x² + 2 cos θ (2ν-1) x √p_c + p_c`` of ``p(10)`` for uniform crosstalk."""
    xs = np.asarray(x, dtype=np.float64)
    c = math.cos(theta)
    return c * c * xs**2 + 2 * c * (2 * nu - 1) * xs * math.sqrt(p_c) + p_c


def fit_small_x_coefficients(xs: npt.ArrayLike, values: npt.ArrayLike, degree: int = 4) -> tuple[float, float, float]:
    """Least-squares polynomial fit returning ``(q0, q1, q2)`` in units of ``x``.

    The fit uses ``degree`` (at least 2) so that higher orders do not leak into the quadratic term.
    """
    xs = np.asarray(xs, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if degree < 2 or xs.size <= degree:
        raise InvalidParameterError(f"Need degree >= 2 and more than {degree} points, got {xs.size}")
    scale = float(np.max(np.abs(xs)))
    coefficients = np.polynomial.polynomial.polyfit(xs / scale, values, degree)
    return float(coefficients[0]), float(coefficients[1] / scale), float(coefficients[2] / scale**2)
