# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import json
import math

import numpy as np
import pytest

from spade_resolve import (
    ContractViolationError,
    CrosstalkKind,
    CrosstalkMatrix,
    InvalidDimensionError,
    InvalidParameterError,
    SphereVector,
    gellmann_basis,
    identity_crosstalk,
    mu_for_strength,
    predicted_strength,
    random_crosstalk,
    sample_crosstalk,
    sample_mu_log_uniform,
    sample_sphere_vector,
    strength,
    strength_for_mu,
    uniform_crosstalk,
)


def test_mu_for_strength():
    assert mu_for_strength(0.0017, 2) == pytest.approx(0.112916, rel=1e-5)
    assert mu_for_strength(0.0, 3) == 0.0
    assert strength_for_mu(mu_for_strength(0.003, 3), 3) == pytest.approx(0.003)


@pytest.mark.parametrize("p_c", [-0.1, 1.0, 2.0])
def test_mu_for_strength_range(p_c):
    with pytest.raises(InvalidParameterError):
        mu_for_strength(p_c, 2)


def test_sphere_vector(rng):
    v = sample_sphere_vector(80, rng)
    assert len(v) == 80
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidParameterError):
        SphereVector(np.array([1.0, 1.0]))


def test_sphere_vector_reproducible():
    a = sample_sphere_vector(15, 3)
    b = sample_sphere_vector(15, 3)
    assert np.array_equal(a.components, b.components)


def test_random_crosstalk_unitary(rng):
    c = random_crosstalk(3, 0.01, rng)
    assert c.matrix.shape == (9, 9)
    assert c.is_unitary
    assert c.kind is CrosstalkKind.RANDOM
    assert c.mu == pytest.approx(mu_for_strength(0.01, 3))
    assert c.index(1, 0) == 3


def test_random_crosstalk_reproducible():
    a = random_crosstalk(2, 1e-3, 11)
    b = random_crosstalk(2, 1e-3, 11)
    c = random_crosstalk(2, 1e-3, 12)
    assert np.array_equal(a.matrix, b.matrix)
    assert not np.array_equal(a.matrix, c.matrix)


@pytest.mark.parametrize("mu", [0.01, 0.03, 0.05])
def test_weak_crosstalk_is_first_order(rng, mu):
    c = random_crosstalk(3, 0.0, rng, mu=mu)
    h = gellmann_basis(9).combine(c.direction.components)
    deviation = np.max(np.abs(c.matrix - (np.eye(9) - 1j * mu * h)))
    assert deviation < mu**2 * np.linalg.norm(h, 2) ** 2
    assert deviation > 0


def test_random_crosstalk_needs_a_seed():
    with pytest.raises(InvalidParameterError):
        random_crosstalk(2, 1e-3, None)
    with pytest.raises(InvalidParameterError):
        sample_crosstalk("random", 2, 1e-3)


def test_random_crosstalk_mean_strength(rng):
    mu = 0.1
    strengths = [random_crosstalk(2, 0.0, rng, mu=mu).measured_strength for _ in range(300)]
    assert np.mean(strengths) == pytest.approx(2 * mu**2 / 15, rel=0.05)


def test_predicted_strength_per_matrix(rng):
    c = random_crosstalk(3, 0.0, rng, mu=1e-3)
    assert c.measured_strength == pytest.approx(predicted_strength(c.direction, c.mu, 3), rel=1e-2)
    with pytest.raises(InvalidParameterError):
        predicted_strength(np.ones(4) / 2, 0.1, 3)


def test_uniform_crosstalk():
    c = uniform_crosstalk(2, 0.04)
    assert np.allclose(np.diag(c.matrix), 1)
    assert c.matrix[0, 1] == pytest.approx(0.2)
    assert c.measured_strength == pytest.approx(0.04)
    assert not c.is_unitary


def test_identity_crosstalk():
    c = identity_crosstalk(3)
    assert c.measured_strength == 0.0
    assert c.is_unitary
    assert sample_crosstalk(CrosstalkKind.IDENTITY, 3, 0.5).kind is CrosstalkKind.IDENTITY


def test_strength_of_arrays():
    assert strength(np.eye(4)) == 0.0
    assert strength([[1, 1], [1, 1]]) == 1.0
    with pytest.raises(InvalidDimensionError):
        strength([[1.0]])


def test_crosstalk_matrix_validation():
    with pytest.raises(InvalidDimensionError):
        CrosstalkMatrix(modes_per_axis=1, matrix=np.eye(1))
    with pytest.raises(ContractViolationError):
        CrosstalkMatrix(modes_per_axis=2, matrix=np.eye(3))
    c = identity_crosstalk(2)
    with pytest.raises(ValueError):
        c.matrix[0, 0] = 2


def test_crosstalk_serialization(rng):
    c = random_crosstalk(2, 1e-3, rng)
    data = json.loads(json.dumps(c.to_dict()))
    assert data["D"] == 2
    assert data["unitary"] is True
    assert data["measured_strength"] == pytest.approx(c.measured_strength)
    restored = CrosstalkMatrix.from_dict(data)
    assert np.array_equal(restored.matrix, c.matrix)
    assert restored.kind is CrosstalkKind.RANDOM
    with pytest.raises(ContractViolationError):
        CrosstalkMatrix.from_dict({"D": 2})


def test_mu_too_large_for_strength():
    with pytest.raises(InvalidParameterError):
        random_crosstalk(2, 0.0, 1, mu=10.0)


def test_sample_mu_log_uniform(rng):
    mus = np.array([sample_mu_log_uniform(rng) for _ in range(2000)])
    assert np.all((mus >= 0.1) & (mus <= 0.8))
    assert np.median(np.log(mus)) == pytest.approx(0.5 * (math.log(0.1) + math.log(0.8)), abs=0.1)
    with pytest.raises(InvalidParameterError):
        sample_mu_log_uniform(rng, 0.8, 0.1)
