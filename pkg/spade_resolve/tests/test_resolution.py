# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import math
from functools import partial

import numpy as np
import pytest

from spade_resolve import (
    CrosstalkKind,
    EnsembleCurve,
    InvalidParameterError,
    MrdQuery,
    NoSolutionError,
    NoThresholdError,
    ThresholdQuery,
    UnreachableFractionError,
    constant_curve,
    di_fisher_curve,
    find_threshold,
    fraction_at_k,
    identity_crosstalk,
    k_ratio_to_fraction,
    random_crosstalk,
    solve_mrd,
    spade_fisher_curve,
    uniform_crosstalk,
)


@pytest.mark.parametrize("photons", [1e2, 1e4, 1e6])
def test_mrd_constant_fisher(photons):
    x = solve_mrd(MrdQuery(photons, constant_curve(1.0)))
    assert 2 * x == pytest.approx(1 / math.sqrt(photons), rel=1e-6)


def test_mrd_quadratic_fisher():
    # w²F = 8x² gives 2x sqrt(8 N) x = 1
    photons = 1e4
    x = solve_mrd(MrdQuery(photons, lambda xs: 8 * np.asarray(xs) ** 2))
    assert x == pytest.approx((1 / (2 * math.sqrt(8 * photons))) ** 0.5, rel=1e-6)


def test_mrd_decreasing_residual():
    # w²F = 1e-4 / x⁴ gives a residual 0.02 / x - 1 that crosses zero from above
    x = solve_mrd(MrdQuery(1.0, lambda xs: 1e-4 / np.asarray(xs) ** 4))
    assert x == pytest.approx(0.02, rel=1e-5)


def test_mrd_shrinks_with_photons(rng):
    curve = partial(spade_fisher_curve, random_crosstalk(3, 0.01, rng), nu=0.7, theta=0.0)
    roots = []
    for photons in [1e2, 1e3, 1e4, 1e5, 1e6]:
        query = MrdQuery(photons, curve)
        roots.append(solve_mrd(query))
        assert query.residual(roots[-1]) == pytest.approx(0.0, abs=1e-5)
    assert all(a > b for a, b in zip(roots, roots[1:]))


def test_mrd_no_solution():
    with pytest.raises(NoSolutionError) as exc:
        solve_mrd(MrdQuery(1e4, constant_curve(1.0), search_window=(1e-6, 1e-3)))
    assert len(exc.value.table) == 200
    assert all(residual < 0 for _, residual in exc.value.table)


def test_mrd_query_validation():
    with pytest.raises(InvalidParameterError):
        MrdQuery(0, constant_curve(1.0))
    with pytest.raises(InvalidParameterError):
        MrdQuery(1e4, constant_curve(1.0), search_window=(0.1, 0.01))
    with pytest.raises(InvalidParameterError):
        MrdQuery(1e4, constant_curve(1.0), scan_points=50)


def test_threshold_crossing():
    query = ThresholdQuery(lambda xs: 0.5 + np.asarray(xs), constant_curve(0.6), (1e-3, 1.0))
    assert find_threshold(query) == pytest.approx(0.1, rel=1e-3)
    assert query.difference(0.2) == pytest.approx(0.1)


def test_threshold_spade_always_ahead():
    assert find_threshold(ThresholdQuery(constant_curve(0.9), constant_curve(0.5), (1e-3, 1.0))) == 0.0


def test_threshold_never_reached():
    with pytest.raises(NoThresholdError) as exc:
        find_threshold(ThresholdQuery(constant_curve(0.1), constant_curve(0.5), (1e-3, 1.0)))
    assert len(exc.value.table) == 200


def test_threshold_of_ensemble_average():
    p_c = 0.0017
    matrices = np.stack([random_crosstalk(3, p_c, seed).matrix for seed in range(200)])
    curve = EnsembleCurve(matrices, 0.7)
    query = ThresholdQuery(curve, partial(di_fisher_curve, nu=0.7, theta=0.0), (1e-4, 0.3))
    assert 0.004 <= find_threshold(query) <= 0.016


def test_k_ratio_identity_is_grid_minimum():
    assert k_ratio_to_fraction(identity_crosstalk(3), 0.9, 1e-3, 0.7) == pytest.approx(0.01)
    assert k_ratio_to_fraction(CrosstalkKind.IDENTITY, 0.95, 1e-2, 0.6) == pytest.approx(0.01)
    assert fraction_at_k(identity_crosstalk(3), 3.0, 1e-3, 0.7) == pytest.approx(1.0, abs=1e-3)


def test_k_ratio_random(rng):
    c = random_crosstalk(3, 1e-3, rng)
    k90 = k_ratio_to_fraction(c, 0.9, 1e-3, 0.7)
    k95 = k_ratio_to_fraction(c, 0.95, 1e-3, 0.7)
    assert 0.01 <= k90 <= k95 <= 20
    assert fraction_at_k(c, k90, 1e-3, 0.7) >= 0.9


def test_k_ratio_samples_from_family():
    a = k_ratio_to_fraction("random", 0.9, 1e-3, 0.7, rng=5)
    b = k_ratio_to_fraction("random", 0.9, 1e-3, 0.7, rng=5)
    assert a == b


def test_k_ratio_validation():
    with pytest.raises(InvalidParameterError):
        k_ratio_to_fraction(identity_crosstalk(3), 1.5, 1e-3, 0.7)
    with pytest.raises(InvalidParameterError):
        k_ratio_to_fraction(identity_crosstalk(3), 0.9, 0.0, 0.7)
    with pytest.raises(InvalidParameterError):
        fraction_at_k(identity_crosstalk(3), -1.0, 1e-3, 0.7)


def test_k_ratio_unreachable():
    # balanced sources carry no information at zero separation
    with pytest.raises(UnreachableFractionError):
        k_ratio_to_fraction(uniform_crosstalk(2, 0.5), 0.9, 0.5, 0.5, k_grid=np.array([0.0]))
