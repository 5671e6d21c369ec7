# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import numpy as np
import pytest
import scipy.linalg

from spade_resolve import (
    ContractViolationError,
    InvalidDimensionError,
    gellmann_basis,
    hermitian_eigendecomposition,
    is_unitary,
    unitary_exp,
)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def test_gellmann_dim2_is_pauli():
    basis = gellmann_basis(2)
    assert len(basis) == 3
    assert np.array_equal(basis.generator(1), [[0, 1], [1, 0]])
    assert np.array_equal(basis.generator(2), [[0, -1j], [1j, 0]])
    assert np.array_equal(basis.generator(3), [[1, 0], [0, -1]])


@pytest.mark.parametrize("dim", [2, 3, 4, 9])
def test_gellmann_orthonormal(dim):
    basis = gellmann_basis(dim)
    g = basis.generators
    assert g.shape == (dim * dim - 1, dim, dim)
    assert np.allclose(np.trace(g, axis1=1, axis2=2), 0)
    assert np.allclose(g, np.conj(np.swapaxes(g, 1, 2)))
    gram = np.einsum("aij,bji->ab", g, g)
    assert np.allclose(gram, 2 * np.eye(len(basis)))


def test_gellmann_dim4_ordering():
    basis = gellmann_basis(4)
    assert basis.labels[0] == ("sym", 0, 1)
    assert basis.labels[1] == ("sym", 0, 2)
    assert basis.labels[6] == ("anti", 0, 1)
    assert basis.labels[7] == ("anti", 0, 2)
    assert [label[0] for label in basis.labels[12:]] == ["diag"] * 3
    assert basis.generator(7)[0, 1] == -1j
    assert basis.generator(7)[1, 0] == 1j


def test_gellmann_cached_and_read_only():
    basis = gellmann_basis(3)
    assert gellmann_basis(3) is basis
    with pytest.raises(ValueError):
        basis.generators[0, 0, 0] = 5


@pytest.mark.parametrize("dim", [1, 0, -3])
def test_gellmann_bad_dim(dim):
    with pytest.raises(InvalidDimensionError):
        gellmann_basis(dim)


def test_generator_index_is_one_based():
    basis = gellmann_basis(2)
    with pytest.raises(IndexError):
        basis.generator(0)
    with pytest.raises(IndexError):
        basis.generator(4)


def test_combine_and_expand(rng):
    basis = gellmann_basis(4)
    lam = rng.standard_normal(len(basis))
    h = basis.combine(lam)
    assert np.allclose(h, h.conj().T)
    assert np.allclose(basis.coefficients(h), lam)
    with pytest.raises(ContractViolationError):
        basis.combine(lam[:-1])


def test_eigendecomposition_reconstructs(rng):
    h = random_hermitian(rng, 9)
    w, v = hermitian_eigendecomposition(h)
    assert np.all(np.diff(w) >= 0)
    assert is_unitary(v)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h)


def test_eigendecomposition_contract():
    with pytest.raises(ContractViolationError):
        hermitian_eigendecomposition([[1, 2], [0, 1]])
    with pytest.raises(ContractViolationError):
        hermitian_eigendecomposition(np.ones((2, 3)))
    with pytest.raises(ContractViolationError):
        hermitian_eigendecomposition([[np.nan, 0], [0, 1]])


@pytest.mark.parametrize("scale", [-0.3, 0.05, 1.7])
def test_unitary_exp_matches_expm(rng, scale):
    h = random_hermitian(rng, 16)
    u = unitary_exp(h, scale)
    assert np.allclose(u, scipy.linalg.expm(1j * scale * h), atol=1e-10)
    assert is_unitary(u)


def test_unitary_exp_zero_scale(rng):
    u = unitary_exp(random_hermitian(rng, 4), 0.0)
    assert np.allclose(u, np.eye(4), atol=1e-12)


def test_is_unitary_rejects():
    assert not is_unitary([[1, 0.1], [0, 1]])


def test_unitary_exp_group_property(rng):
    h = random_hermitian(rng, 9)
    product = unitary_exp(h, 0.4) @ unitary_exp(h, -1.1)
    assert np.allclose(product, unitary_exp(h, -0.7), atol=1e-10)
    assert np.allclose(unitary_exp(h, 0.4) @ unitary_exp(h, -0.4), np.eye(9), atol=1e-10)
