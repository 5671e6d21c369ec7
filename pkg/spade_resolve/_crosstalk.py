# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Crosstalk matrices: random generic unitaries of given strength, the uniform model and the strength functional."""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from ._data_utils import as_generator
from ._exceptions import ContractViolationError, InvalidDimensionError, InvalidParameterError
from ._linalg import as_complex_matrix, gellmann_basis, is_unitary, unitary_exp
from ._types import RngLike

logger = logging.getLogger(__name__)


class CrosstalkKind(str, enum.Enum):
    RANDOM = "random"
    UNIFORM = "uniform"
    IDENTITY = "identity"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class SphereVector:
    """A real unit vector, the direction ``λ`` of a crosstalk generator."""

    components: np.ndarray

    def __post_init__(self):
        components = np.asarray(self.components, dtype=np.float64)
        if components.ndim != 1 or components.size == 0:
            raise InvalidParameterError(f"Sphere vectors are 1-D, got shape {components.shape}")
        if abs(np.linalg.norm(components) - 1.0) >= 1e-12:
            raise InvalidParameterError(f"Sphere vectors have unit norm, got {np.linalg.norm(components)!r}")
        components.setflags(write=False)
        object.__setattr__(self, "components", components)

    def __len__(self) -> int:
        return self.components.size

    def __getitem__(self, index):
        return self.components[index]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


def _check_modes(D: int) -> int:  # noqa: N803
    if int(D) != D or D < 2:
        raise InvalidDimensionError(f"Crosstalk needs at least 2 modes per axis, got D={D}")
    return int(D)


def _check_strength(p_c: float) -> float:
    if not (0.0 <= p_c < 1.0):
        raise InvalidParameterError(f"Crosstalk strength must be in [0, 1), got p_c={p_c}")
    return float(p_c)


@dataclass(frozen=True, eq=False)
class CrosstalkMatrix:
    """A ``D² x D²`` crosstalk matrix with its strength metadata.

    Rows and columns are indexed by mode pairs ``(n, m)`` flattened as ``n * D + m``.

    Attributes:
        modes_per_axis: ``D``, the number of Hermite-Gauss modes kept per transverse axis.
        matrix: The complex matrix ``c``, read-only.
        nominal_strength: The strength ``p_c`` the matrix was requested with.
        mu: The exponent scale ``μ`` for unitary-generated matrices, 0 otherwise.
        kind: How the matrix was made.
        direction: The sphere vector ``λ`` for random matrices.
    """

    modes_per_axis: int
    matrix: np.ndarray
    nominal_strength: float = 0.0
    mu: float = 0.0
    kind: CrosstalkKind = CrosstalkKind.CUSTOM
    direction: SphereVector | None = field(default=None, repr=False)

    def __post_init__(self):
        D = _check_modes(self.modes_per_axis)  # noqa: N806
        matrix = as_complex_matrix(self.matrix).copy()
        if matrix.shape != (D * D, D * D):
            raise ContractViolationError(f"Crosstalk for D={D} must be {D * D}x{D * D}, got {matrix.shape}")
        _check_strength(self.nominal_strength)
        if self.mu < 0:
            raise InvalidParameterError(f"mu must be nonnegative, got {self.mu}")
        matrix.setflags(write=False)
        object.__setattr__(self, "modes_per_axis", D)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "kind", CrosstalkKind(self.kind))

    @property
    def D(self) -> int:  # noqa: N802
        return self.modes_per_axis

    @property
    def side(self) -> int:
        return self.modes_per_axis**2

    @property
    def measured_strength(self) -> float:
        """The mean off-diagonal ``|c|²`` of this particular matrix."""
        return strength(self)

    @property
    def is_unitary(self) -> bool:
        return is_unitary(self.matrix)

    def index(self, n: int, m: int) -> int:
        """Flattened row/column index of the mode pair ``(n, m)``."""
        return n * self.modes_per_axis + m

    def to_dict(self) -> dict[str, Any]:
        """Serialize to a JSON friendly dict."""
        return {
            "D": self.modes_per_axis,
            "kind": self.kind.value,
            "mu": self.mu,
            "nominal_strength": self.nominal_strength,
            "measured_strength": self.measured_strength,
            "unitary": self.is_unitary,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CrosstalkMatrix:
        """Rebuild a matrix written by :meth:`to_dict`. The measured strength is recomputed, not trusted."""
        try:
            matrix = np.asarray(data["re"], dtype=np.float64) + 1j * np.asarray(data["im"], dtype=np.float64)
            return cls(
                modes_per_axis=int(data["D"]),
                matrix=matrix,
                nominal_strength=float(data.get("nominal_strength", 0.0)),
                mu=float(data.get("mu", 0.0)),
                kind=CrosstalkKind(data.get("kind", CrosstalkKind.CUSTOM)),
            )
        except KeyError as e:
            raise ContractViolationError(f"Crosstalk record is missing key {e}") from e


def sample_sphere_vector(dim: int, rng: RngLike) -> SphereVector:
    """Draw a vector uniformly from the unit sphere in ``dim`` dimensions.

    Components are independent standard normals, normalised afterwards.

    Args:
        dim: Number of components, ``D⁴ - 1`` for crosstalk directions.
        rng: A numpy generator or an explicit integer seed.

    Returns:
        The unit vector.
    """
    if int(dim) != dim or dim < 1:
        raise InvalidDimensionError(f"Sphere vectors need dim >= 1, got {dim}")
    rng = as_generator(rng)
    while True:
        v = rng.standard_normal(int(dim))
        norm = np.linalg.norm(v)
        if norm > 0:
            return SphereVector(v / norm)


def mu_for_strength(p_c: float, D: int) -> float:  # noqa: N803
    """Exponent scale ``μ = sqrt(p_c (D⁴ - 1) / 2)`` giving average crosstalk strength ``p_c``.

    Raises:
        InvalidParameterError: If ``p_c`` is outside ``[0, 1)``.

    Examples:
        >>> round(mu_for_strength(0.0017, 2), 5)
        0.11292
    """
    p_c = _check_strength(p_c)
    D = _check_modes(D)  # noqa: N806
    return math.sqrt(p_c * (D**4 - 1) / 2.0)


def strength_for_mu(mu: float, D: int) -> float:  # noqa: N803
    """Average crosstalk strength ``2 μ² / (D⁴ - 1)`` of random matrices with exponent scale ``μ``."""
    if mu < 0:
        raise InvalidParameterError(f"mu must be nonnegative, got {mu}")
    D = _check_modes(D)  # noqa: N806
    return 2.0 * mu * mu / (D**4 - 1)


def predicted_strength(direction: SphereVector | npt.ArrayLike, mu: float, D: int) -> float:  # noqa: N803
    """Lowest-order strength of one matrix ``exp(-i μ λ·G)``, ``2 μ² Σ' λ_k² / (D²(D² - 1))``.

    The primed sum runs over the off-diagonal (symmetric and antisymmetric) generators.
    """
    D = _check_modes(D)  # noqa: N806
    side = D * D
    lam = np.asarray(direction, dtype=np.float64)
    if lam.shape != (side * side - 1,):
        raise InvalidParameterError(f"Expected {side * side - 1} components, got shape {lam.shape}")
    off_diagonal = side * (side - 1)
    return float(2.0 * mu * mu * np.sum(lam[:off_diagonal] ** 2) / off_diagonal)


def random_crosstalk(D: int, p_c: float, rng: RngLike, *, mu: float | None = None) -> CrosstalkMatrix:  # noqa: N803
    """Draw a generic unitary crosstalk matrix ``c = exp(-i μ λ·G)``.

    Args:
        D: Modes per axis.
        p_c: Requested average strength; ``μ`` follows from :func:`mu_for_strength`.
        rng: A numpy generator or an explicit integer seed.
        mu: Use this exponent scale instead of deriving it from ``p_c``. ``p_c`` is then
            replaced by :func:`strength_for_mu`.

    Returns:
        The sampled matrix, unitary to machine precision.

    Raises:
        InvalidParameterError: If ``p_c`` or ``mu`` are out of range.
        InvalidDimensionError: If ``D < 2``.
    """
    D = _check_modes(D)  # noqa: N806
    if mu is None:
        mu = mu_for_strength(p_c, D)
    else:
        p_c = strength_for_mu(mu, D)
        if p_c >= 1.0:
            raise InvalidParameterError(f"mu={mu} corresponds to p_c={p_c} >= 1 for D={D}")
    basis = gellmann_basis(D * D)
    direction = sample_sphere_vector(len(basis), rng)
    matrix = unitary_exp(basis.combine(direction.components), -mu)
    logger.debug("Sampled crosstalk D=%d mu=%.4g p_c=%.4g", D, mu, p_c)
    return CrosstalkMatrix(
        modes_per_axis=D,
        matrix=matrix,
        nominal_strength=p_c,
        mu=mu,
        kind=CrosstalkKind.RANDOM,
        direction=direction,
    )


def uniform_crosstalk(D: int, p_c: float) -> CrosstalkMatrix:  # noqa: N803
    """Uniform crosstalk model: ones on the diagonal, ``sqrt(p_c)`` everywhere else.

    The result is not unitary and probabilities computed from it are not renormalised.
    """
    D = _check_modes(D)  # noqa: N806
    p_c = _check_strength(p_c)
    matrix = np.full((D * D, D * D), math.sqrt(p_c), dtype=np.complex128)
    np.fill_diagonal(matrix, 1.0)
    return CrosstalkMatrix(modes_per_axis=D, matrix=matrix, nominal_strength=p_c, kind=CrosstalkKind.UNIFORM)


def identity_crosstalk(D: int) -> CrosstalkMatrix:  # noqa: N803
    """Crosstalk-free measurement."""
    D = _check_modes(D)  # noqa: N806
    return CrosstalkMatrix(modes_per_axis=D, matrix=np.eye(D * D), kind=CrosstalkKind.IDENTITY)


def strength(c: CrosstalkMatrix | npt.ArrayLike) -> float:
    """Crosstalk strength, the mean ``|c_ij|²`` over off-diagonal entries."""
    matrix = c.matrix if isinstance(c, CrosstalkMatrix) else as_complex_matrix(c)
    side = matrix.shape[0]
    if side < 2:
        raise InvalidDimensionError("Strength needs at least a 2x2 matrix")
    squared = np.abs(matrix) ** 2
    return float((squared.sum() - np.trace(squared)) / (side * (side - 1)))


def sample_crosstalk(
    kind: CrosstalkKind | str,
    D: int,  # noqa: N803
    p_c: float,
    rng: RngLike | None = None,
    *,
    mu: float | None = None,
) -> CrosstalkMatrix:
    """Produce a crosstalk matrix of the given family.

    ``rng`` is only consumed by the random family.
    """
    kind = CrosstalkKind(kind)
    if kind is CrosstalkKind.RANDOM:
        if rng is None:
            raise InvalidParameterError("Random crosstalk needs an explicit rng or seed")
        return random_crosstalk(D, p_c, rng, mu=mu)
    if kind is CrosstalkKind.UNIFORM:
        return uniform_crosstalk(D, p_c)
    if kind is CrosstalkKind.IDENTITY:
        return identity_crosstalk(D)
    raise InvalidParameterError(f"Cannot sample crosstalk of kind {kind.value!r}")


def sample_mu_log_uniform(rng: RngLike, lo: float = 0.1, hi: float = 0.8) -> float:
    """Draw ``μ = exp(r)`` with ``r`` uniform on ``[ln lo, ln hi]``."""
    if not (0 < lo < hi):
        raise InvalidParameterError(f"mu interval must satisfy 0 < lo < hi, got ({lo}, {hi})")
    return float(np.exp(as_generator(rng).uniform(math.log(lo), math.log(hi))))
