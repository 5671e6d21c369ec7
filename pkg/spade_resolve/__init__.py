# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""
This module contains `spade_resolve`, a library for the resolution limits of spatial-mode demultiplexing
under crosstalk.

At the top level, `spade_resolve` provides a synchronous API that wraps the asynchronous API provided by
`spade_resolve.asyncio`. Both APIs are functionally identical with the same signatures and return values.
"""
from __future__ import annotations

from typing import Any, Callable

from . import asyncio
from ._async_utils import run_sync as _run_sync
from ._config import RunConfig
from ._crosstalk import (
    CrosstalkKind,
    CrosstalkMatrix,
    SphereVector,
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
from ._ensemble import (
    EnsembleCurve,
    EnsembleRun,
    EnsembleSample,
    EnsembleSpec,
    EnsembleSummary,
    make_sample,
    quantile,
    sample_rng,
    sub_seed,
    summarize,
)
from ._exceptions import (
    ConfigError,
    ContractViolationError,
    EmptyEnsembleError,
    InvalidDimensionError,
    InvalidParameterError,
    ModeIndexError,
    NoSolutionError,
    NoThresholdError,
    QuadratureError,
    UnreachableFractionError,
)
from ._fisher import (
    FisherMethod,
    FisherResult,
    QuadratureSettings,
    asymptotic_band,
    asymptotic_q0_d2,
    asymptotic_q0_ensemble_stats,
    di_asymptote,
    di_fisher,
    di_fisher_curve,
    fit_small_x_coefficients,
    ideal_fisher,
    q0_limit,
    spade_fisher,
    spade_fisher_curve,
    uniform_fisher_leading,
    uniform_p10_approx,
    uniform_q_coefficients,
)
from ._io import Table
from ._linalg import (
    GellMannBasis,
    gellmann_basis,
    hermitian_eigendecomposition,
    is_unitary,
    unitary_exp,
)
from ._photonics import (
    DetectionModel,
    SourceGeometry,
    beta,
    beta_dx,
    canonicalize,
    detection_probability,
    detection_probability_dx,
    detection_table,
    detector_coefficient,
)
from ._resolution import (
    MrdQuery,
    ThresholdQuery,
    constant_curve,
    find_threshold,
    fraction_at_k,
    k_ratio_to_fraction,
    solve_mrd,
)
from .asyncio import (
    ensemble_curve as _ensemble_curve,
)
from .asyncio import (
    load_run_config as _load_run_config,
)
from .asyncio import (
    map_ensemble as _map_ensemble,
)
from .asyncio import (
    run_command as _run_command,
)
from .asyncio import (
    run_ensemble as _run_ensemble,
)
from .asyncio import (
    sample_matrices as _sample_matrices,
)
from .asyncio import (
    write_samples_csv as _write_samples_csv,
)
from .asyncio import (
    write_table as _write_table,
)

try:
    from ._version import version as __version__  # noqa
    from ._version import version_tuple as __version_tuple__  # noqa
except ImportError:
    __version__ = "0.0.0"
    __version_tuple__ = (0, 0, 0)


def map_ensemble(spec: EnsembleSpec, evaluator: Callable[[EnsembleSample], Any], *, workers: int = 1) -> EnsembleRun:
    """Evaluate every sample of an ensemble and keep each outcome.

    Args:
        spec: The ensemble description.
        evaluator: Called with each :class:`EnsembleSample`.
        workers: Number of worker threads.

    Returns:
        The per-sample outcomes in sample order.
    """
    return _run_sync(_map_ensemble)(spec, evaluator, workers=workers)


def run_ensemble(
    spec: EnsembleSpec,
    evaluator: Callable[[EnsembleSample], float],
    *,
    workers: int = 1,
    keep_values: bool = True,
) -> EnsembleSummary:
    """Evaluate a scalar for every sample of an ensemble and summarise it.

    Failed samples are logged, excluded from the statistics and counted in ``failed``.
    The result does not depend on ``workers``.

    Examples:
        >>> import spade_resolve
        >>> spec = spade_resolve.EnsembleSpec(sample_count=500, seed=7, D=2, mu=0.1)
        >>> summary = spade_resolve.run_ensemble(spec, lambda s: s.crosstalk.measured_strength)
        >>> summary.mean  # close to 2 * 0.1**2 / 15
    """
    return _run_sync(_run_ensemble)(spec, evaluator, workers=workers, keep_values=keep_values)


def sample_matrices(spec: EnsembleSpec, *, workers: int = 1) -> list[CrosstalkMatrix]:
    return _run_sync(_sample_matrices)(spec, workers=workers)


def ensemble_curve(spec: EnsembleSpec, *, workers: int = 1) -> EnsembleCurve:
    """Sample an ensemble and return its averaged SPADE Fisher curve."""
    return _run_sync(_ensemble_curve)(spec, workers=workers)


def write_samples_csv(path, run: EnsembleRun, key: Callable[[Any], Any] | None = None) -> None:
    return _run_sync(_write_samples_csv)(path, run, key)


def load_run_config(command: str, path=None, overrides: dict | None = None, environ: dict | None = None) -> RunConfig:
    """Resolve the configuration of a CLI command from defaults, environment, a config file and overrides."""
    return _run_sync(_load_run_config)(command, path, overrides, environ)


def run_command(config: RunConfig) -> Table:
    """Run the scan of a CLI command and return its table."""
    return _run_sync(_run_command)(config)


def write_table(table: Table, path=None, fmt: str = "csv") -> None:
    return _run_sync(_write_table)(table, path, fmt)


__all__ = [
    "asyncio",
    "beta",
    "beta_dx",
    "canonicalize",
    "constant_curve",
    "ConfigError",
    "ContractViolationError",
    "CrosstalkKind",
    "CrosstalkMatrix",
    "DetectionModel",
    "detection_probability",
    "detection_probability_dx",
    "detection_table",
    "detector_coefficient",
    "di_asymptote",
    "di_fisher",
    "di_fisher_curve",
    "EmptyEnsembleError",
    "EnsembleCurve",
    "EnsembleRun",
    "EnsembleSample",
    "EnsembleSpec",
    "EnsembleSummary",
    "ensemble_curve",
    "find_threshold",
    "FisherMethod",
    "FisherResult",
    "fit_small_x_coefficients",
    "fraction_at_k",
    "GellMannBasis",
    "gellmann_basis",
    "hermitian_eigendecomposition",
    "ideal_fisher",
    "identity_crosstalk",
    "InvalidDimensionError",
    "InvalidParameterError",
    "is_unitary",
    "k_ratio_to_fraction",
    "load_run_config",
    "make_sample",
    "map_ensemble",
    "ModeIndexError",
    "MrdQuery",
    "mu_for_strength",
    "NoSolutionError",
    "NoThresholdError",
    "predicted_strength",
    "q0_limit",
    "QuadratureError",
    "QuadratureSettings",
    "quantile",
    "random_crosstalk",
    "run_command",
    "run_ensemble",
    "RunConfig",
    "sample_crosstalk",
    "sample_matrices",
    "sample_mu_log_uniform",
    "sample_rng",
    "sample_sphere_vector",
    "solve_mrd",
    "SourceGeometry",
    "spade_fisher",
    "spade_fisher_curve",
    "SphereVector",
    "strength",
    "strength_for_mu",
    "sub_seed",
    "summarize",
    "Table",
    "ThresholdQuery",
    "UnreachableFractionError",
    "asymptotic_band",
    "asymptotic_q0_d2",
    "asymptotic_q0_ensemble_stats",
    "uniform_crosstalk",
    "uniform_fisher_leading",
    "uniform_p10_approx",
    "uniform_q_coefficients",
    "unitary_exp",
    "write_samples_csv",
    "write_table",
]
