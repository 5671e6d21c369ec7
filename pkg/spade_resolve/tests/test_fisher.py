# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import math

import numpy as np
import pytest

from spade_resolve import (
    DetectionModel,
    EnsembleCurve,
    FisherMethod,
    InvalidParameterError,
    QuadratureError,
    QuadratureSettings,
    SourceGeometry,
    asymptotic_band,
    asymptotic_q0_d2,
    asymptotic_q0_ensemble_stats,
    di_asymptote,
    di_fisher,
    di_fisher_curve,
    fit_small_x_coefficients,
    ideal_fisher,
    identity_crosstalk,
    q0_limit,
    random_crosstalk,
    spade_fisher,
    spade_fisher_curve,
    uniform_crosstalk,
    uniform_fisher_leading,
    uniform_p10_approx,
    uniform_q_coefficients,
)


def test_ideal_reference_is_one():
    result = ideal_fisher(SourceGeometry(x=0.1, theta=0.2, nu=0.7))
    assert result.method is FisherMethod.IDEAL_REFERENCE
    assert result.w2F == pytest.approx(1.0, abs=1e-3)


def test_ideal_reference_random_geometries(rng):
    xs_small = np.geomspace(1e-3, 0.15, 20)
    xs_large = np.linspace(0.15, 0.3, 6)
    identity = identity_crosstalk(3)
    for _ in range(100):
        nu = rng.uniform(0.5, 1.0)
        theta = rng.uniform(0, 2 * math.pi)
        small = spade_fisher_curve(identity, xs_small, nu, theta)
        large = spade_fisher_curve(identity, xs_large, nu, theta)
        # truncation to D=3 only ever removes information
        assert np.all(small <= 1 + 1e-12)
        assert np.all(1 - small <= 1e-3)
        assert np.all(1 - large <= 2e-2)


def test_spade_invariant_under_axis_swap(rng):
    D = 3
    swap = np.zeros((D * D, D * D))
    for n in range(D):
        for m in range(D):
            swap[m * D + n, n * D + m] = 1.0
    c = random_crosstalk(D, 0.01, rng)
    swapped = swap @ c.matrix @ swap.T
    xs = np.geomspace(1e-4, 0.3, 11)
    theta = 0.3
    original = spade_fisher_curve(c, xs, 0.7, theta)
    mirrored = spade_fisher_curve(swapped, xs, 0.7, math.pi / 2 - theta)
    assert np.allclose(original, mirrored, rtol=1e-10)


def test_spade_terms_sum(rng):
    model = DetectionModel(SourceGeometry(0.05, 0.3, 0.8), random_crosstalk(3, 1e-3, rng))
    result = spade_fisher(model)
    assert result.terms.shape == (9,)
    assert result.terms.sum() == pytest.approx(result.w2F)
    assert float(result) == result.w2F
    assert result.dropped_modes == ()


def test_spade_drops_zero_probability_modes():
    result = spade_fisher(DetectionModel(SourceGeometry(0.1, 0.0, 0.7), identity_crosstalk(2)))
    # theta = 0 leaves the modes 01 and 11 dark
    assert result.dropped_modes == (1, 3)
    assert np.isfinite(result.w2F)


def test_curve_matches_pointwise(rng):
    c = random_crosstalk(3, 0.01, rng)
    xs = [0.001, 0.02, 0.3]
    curve = spade_fisher_curve(c, xs, 0.3, 1.0)
    for x, value in zip(xs, curve):
        assert spade_fisher(DetectionModel(SourceGeometry(x, 1.0, 0.3), c)).w2F == pytest.approx(value)


def test_curve_validation():
    with pytest.raises(InvalidParameterError):
        spade_fisher_curve(np.eye(5), [0.1], 0.7)
    with pytest.raises(InvalidParameterError):
        spade_fisher_curve(identity_crosstalk(2), [-0.1], 0.7)
    with pytest.raises(InvalidParameterError):
        spade_fisher_curve(identity_crosstalk(2), [0.1], 1.5)


def test_q0_limit_identity():
    assert q0_limit(identity_crosstalk(3), 0.7, 0.4) == pytest.approx(1.0)


@pytest.mark.parametrize("theta", [0.0, 0.6, 2.0])
def test_q0_limit_matches_small_x(rng, theta):
    c = random_crosstalk(3, 1e-3, rng)
    limit = q0_limit(c, 0.7, theta)
    assert spade_fisher_curve(c, [1e-8], 0.7, theta)[0] == pytest.approx(limit, rel=1e-4)


def test_q0_ensemble_mean(rng):
    matrices = np.stack([random_crosstalk(2, 1e-4, rng).matrix for _ in range(2000)])
    values = EnsembleCurve(matrices, 0.7).per_sample([1e-7])[:, 0]
    mean, std = asymptotic_q0_ensemble_stats(0.7, 0.0)
    assert mean == pytest.approx(0.08)
    assert std == pytest.approx(0.056569, rel=1e-5)
    assert abs(np.mean(values) - mean) <= 3 * np.std(values) / math.sqrt(len(values))
    assert np.std(values) == pytest.approx(std, rel=0.1)


def test_q0_ensemble_mean_three_modes(rng):
    values = [q0_limit(random_crosstalk(3, 1e-4, rng), 0.7, 0.0) for _ in range(600)]
    mean, std = asymptotic_q0_ensemble_stats(0.7, 0.0)
    assert np.mean(values) == pytest.approx(mean, rel=0.1)
    assert np.std(values) == pytest.approx(std, rel=0.2)


def test_asymptotic_band():
    lo, hi = asymptotic_band(0.7, 0.0)
    mean, std = asymptotic_q0_ensemble_stats(0.7, 0.0)
    assert (lo, hi) == pytest.approx((mean - std, mean + std))
    with pytest.raises(InvalidParameterError):
        asymptotic_q0_ensemble_stats(0.3, 0.0)


def test_closed_form_d2_limit(rng):
    mu = 0.02
    errors = []
    for _ in range(101):
        c = random_crosstalk(2, 0.0, rng, mu=mu)
        exact = q0_limit(c, 0.8, 0.4)
        errors.append(abs(asymptotic_q0_d2(c.direction, mu, 0.8, 0.4) - exact) / exact)
    assert np.median(errors) <= 5 * mu
    with pytest.raises(InvalidParameterError):
        asymptotic_q0_d2(np.ones(3) / math.sqrt(3), mu, 0.8, 0.4)


@pytest.mark.parametrize("nu", [0.7, 0.9])
@pytest.mark.parametrize("theta", [0.0, math.pi / 4])
def test_uniform_small_x_coefficients(nu, theta):
    p_c = 1e-4
    xs = np.linspace(1e-5, math.sqrt(p_c) / 50, 200)
    values = spade_fisher_curve(uniform_crosstalk(2, p_c), xs, nu, theta)
    q0, q1, q2 = fit_small_x_coefficients(xs, values)
    e0, e1, e2 = uniform_q_coefficients(nu, theta, p_c)
    assert q0 == pytest.approx(e0, rel=0.03)
    assert q1 == pytest.approx(e1, rel=0.05)
    assert q2 == pytest.approx(e2, rel=0.05)


def test_uniform_balanced_sources_have_no_linear_term():
    p_c = 1e-4
    xs = np.linspace(1e-5, math.sqrt(p_c) / 50, 200)
    values = spade_fisher_curve(uniform_crosstalk(2, p_c), xs, 0.5, 0.0)
    q0, q1, q2 = fit_small_x_coefficients(xs, values)
    e0, e1, e2 = uniform_q_coefficients(0.5, 0.0, p_c)
    assert abs(q0) < 1e-6
    assert abs(q1) < 1e-6
    assert (e0, e1) == (0.0, 0.0)
    assert q2 == pytest.approx(e2, rel=0.05)


def test_uniform_printed_prefactor():
    derived = uniform_q_coefficients(0.7, 0.3, 1e-3)[1]
    printed = uniform_q_coefficients(0.7, 0.3, 1e-3, printed=True)[1]
    assert derived == pytest.approx(4 * printed)


def test_uniform_leading_limits():
    assert uniform_fisher_leading(0.0, 0.7, 0.3, 1e-3) == pytest.approx(0.16)
    assert uniform_fisher_leading(1.0, 0.7, 0.3, 1e-8) == pytest.approx(1.0, rel=1e-3)


def test_uniform_p10_approx():
    p_c = 1e-4
    model = DetectionModel(SourceGeometry(1e-3, 0.0, 0.7), uniform_crosstalk(2, p_c))
    exact = model.probabilities()[2]
    assert uniform_p10_approx(1e-3, 0.7, 0.0, p_c) == pytest.approx(exact, rel=1e-5)


def test_fit_small_x_coefficients_exact_polynomial():
    xs = np.linspace(0.0, 0.1, 50)
    q0, q1, q2 = fit_small_x_coefficients(xs, 1 + 2 * xs + 3 * xs**2 + 0.5 * xs**3)
    assert (q0, q1, q2) == pytest.approx((1, 2, 3))
    with pytest.raises(InvalidParameterError):
        fit_small_x_coefficients(xs[:3], xs[:3])


def test_direct_imaging_single_source_is_one():
    for x in (0.01, 0.3, 1.0):
        assert di_fisher(SourceGeometry(x, 0.5, 1.0)).w2F == pytest.approx(1.0, rel=1e-6)


def test_direct_imaging_balanced_small_x():
    x = 0.01
    assert di_fisher(SourceGeometry(x, 0.0, 0.5)).w2F == pytest.approx(8 * x**2, rel=2e-2)


@pytest.mark.parametrize("nu", [0.5, 0.6, 0.7, 0.9, 1.0])
def test_direct_imaging_small_x_limit(nu):
    assert di_fisher(SourceGeometry(1e-3, 0.0, nu)).w2F == pytest.approx(di_asymptote(nu), abs=1e-3)
    assert di_asymptote(nu) == pytest.approx((2 * nu - 1) ** 2)


def test_direct_imaging_convergence_metadata():
    result = di_fisher(SourceGeometry(0.2, 0.0, 0.7))
    assert result.method is FisherMethod.DIRECT_IMAGING
    assert result.nodes >= 160
    assert result.error_estimate <= max(1e-6 * result.w2F, 1e-12)
    assert result.relative_error <= 1e-6


def test_direct_imaging_curve_symmetry():
    xs = [0.05, 0.2]
    assert np.allclose(di_fisher_curve(xs, 0.7, 0.0), di_fisher_curve(xs, 0.3, math.pi))


def test_direct_imaging_bounded_by_single_source():
    values = di_fisher_curve(np.geomspace(1e-3, 1.0, 12), 0.7)
    assert np.all(values > 0)
    assert np.all(values <= 1 + 1e-9)


def test_quadrature_settings_validation():
    with pytest.raises(InvalidParameterError):
        QuadratureSettings(initial_nodes=40)
    with pytest.raises(InvalidParameterError):
        QuadratureSettings(initial_nodes=100, max_nodes=150)


def test_quadrature_error_when_unconverged():
    settings = QuadratureSettings(initial_nodes=80, max_nodes=160, rtol=0.0, atol=0.0)
    with pytest.raises(QuadratureError) as exc:
        di_fisher(SourceGeometry(0.4, 0.0, 0.7), settings)
    assert exc.value.nodes == 160
