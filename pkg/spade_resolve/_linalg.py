# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Dense complex matrix kernel: Hermitian eigensystems, unitary exponentials and Gell-Mann bases."""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from cachetools import LRUCache, cached

from ._exceptions import ContractViolationError, InvalidDimensionError

logger = logging.getLogger(__name__)

HERMITIAN_ATOL = 1e-12


def as_complex_matrix(m: npt.ArrayLike, *, square: bool = True) -> np.ndarray:
    """Validate and convert an array-like into a finite 2-D complex128 array.

    Raises:
        ContractViolationError: If the input is not 2-D, not square (when required) or not finite.
    """
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.size == 0:
        raise ContractViolationError(f"Expected a non-empty 2-D matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ContractViolationError(f"Expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError("Matrix entries must be finite")
    return arr


def is_unitary(u: npt.ArrayLike, atol: float = 1e-10) -> bool:
    """Check ``U U† = 1`` entrywise within ``atol``."""
    u = np.asarray(u, dtype=np.complex128)
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) < atol)


@dataclass(frozen=True, eq=False)
class GellMannBasis:
    """The ``dim² - 1`` generalized Gell-Mann matrices of side ``dim``.

    Generators are stored in a fixed order:

    1. symmetric ``E_jk + E_kj`` for ``j < k`` in lexicographic order,
    2. antisymmetric ``-i(E_jk - E_kj)`` in the same order,
    3. diagonal ``sqrt(2/(l(l+1))) (sum_{j<=l} E_jj - l E_{l+1,l+1})`` for ``l = 1 .. dim-1``.

    For ``dim = 4`` and mode order ``00, 01, 10, 11`` this makes generator 1 (1-based) the symmetric
    ``00-01`` coupling, generator 7 its antisymmetric partner, generators 2 and 8 the ``00-10`` pair and
    13-15 the diagonal ones.

    Attributes:
        dim: Side length of each generator.
        generators: Read-only array of shape ``(dim**2 - 1, dim, dim)``.
        labels: One ``(kind, j, k)`` tuple per generator with 0-based ``j, k``;
            diagonal generators use ``("diag", l, l)``.
    """

    dim: int
    generators: np.ndarray
    labels: tuple[tuple[str, int, int], ...]

    def __len__(self) -> int:
        return self.generators.shape[0]

    def __getitem__(self, index: int) -> np.ndarray:
        return self.generators[index]

    def generator(self, k: int) -> np.ndarray:
        """Return generator ``k`` counted from 1, matching the usual λ₁, λ₂, ... notation."""
        if not 1 <= k <= len(self):
            raise IndexError(f"Generator index must be in 1..{len(self)}, got {k}")
        return self.generators[k - 1]

    def combine(self, coefficients: npt.ArrayLike) -> np.ndarray:
        """Return the Hermitian matrix ``sum_k coefficients[k] G_k``."""
        coefficients = np.asarray(coefficients, dtype=np.float64)
        if coefficients.shape != (len(self),):
            raise ContractViolationError(
                f"Expected {len(self)} coefficients for dimension {self.dim}, got shape {coefficients.shape}"
            )
        return np.tensordot(coefficients, self.generators, axes=1)

    def coefficients(self, h: npt.ArrayLike) -> np.ndarray:
        """Expand a traceless Hermitian matrix in this basis, ``λ_k = Tr(h G_k) / 2``."""
        h = as_complex_matrix(h)
        return 0.5 * np.real(np.einsum("kij,ji->k", self.generators, h))


@cached(LRUCache(maxsize=32), lock=threading.Lock())
def gellmann_basis(dim: int) -> GellMannBasis:
    """Build the generalized Gell-Mann basis of ``su(dim)``.

    Args:
        dim: Matrix side length, at least 2. Crosstalk matrices use ``dim = D**2``.

    Returns:
        The basis with the ordering documented on :class:`GellMannBasis`.

    Raises:
        InvalidDimensionError: If ``dim < 2``.

    Examples:
        >>> basis = gellmann_basis(2)
        >>> basis.generator(1)  # Pauli x
        array([[0.+0.j, 1.+0.j],
               [1.+0.j, 0.+0.j]])
    """
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Gell-Mann bases need dim >= 2, got {dim}")
    dim = int(dim)
    pairs = [(j, k) for j in range(dim) for k in range(j + 1, dim)]
    generators = np.zeros((dim * dim - 1, dim, dim), dtype=np.complex128)
    labels: list[tuple[str, int, int]] = []
    index = 0
    for j, k in pairs:
        generators[index, j, k] = generators[index, k, j] = 1.0
        labels.append(("sym", j, k))
        index += 1
    for j, k in pairs:
        generators[index, j, k] = -1j
        generators[index, k, j] = 1j
        labels.append(("anti", j, k))
        index += 1
    for l in range(1, dim):  # noqa: E741
        norm = np.sqrt(2.0 / (l * (l + 1)))
        generators[index, np.arange(l), np.arange(l)] = norm
        generators[index, l, l] = -l * norm
        labels.append(("diag", l, l))
        index += 1
    generators.setflags(write=False)
    logger.debug("Built Gell-Mann basis for dim=%d with %d generators", dim, index)
    return GellMannBasis(dim=dim, generators=generators, labels=tuple(labels))


def hermitian_eigendecomposition(m: npt.ArrayLike, atol: float = HERMITIAN_ATOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix.

    Args:
        m: A square complex matrix.
        atol: Largest tolerated entry of ``m - m†``.

    Returns:
        ``(w, V)`` with ascending real eigenvalues ``w`` and unitary ``V`` such that ``m = V diag(w) V†``.

    Raises:
        ContractViolationError: If ``m`` is not square, not finite or not Hermitian within ``atol``.
    """
    arr = as_complex_matrix(m)
    asymmetry = np.max(np.abs(arr - arr.conj().T))
    if asymmetry > atol:
        raise ContractViolationError(f"Matrix is not Hermitian: max |m - m†| = {asymmetry:.3e} > {atol:.1e}")
    # eigh reads only one triangle, symmetrise so round-off in the other does not go unnoticed
    w, v = np.linalg.eigh(0.5 * (arr + arr.conj().T))
    return w, v


def unitary_exp(h: npt.ArrayLike, scale: float) -> np.ndarray:
    """Compute ``exp(i * scale * h)`` for Hermitian ``h`` through its eigendecomposition.

    The crosstalk model ``c = exp(-i μ λ·G)`` is ``unitary_exp(λ·G, -μ)``.

    Raises:
        ContractViolationError: Propagated from :func:`hermitian_eigendecomposition`.
    """
    w, v = hermitian_eigendecomposition(h)
    return (v * np.exp(1j * float(scale) * w)) @ v.conj().T
