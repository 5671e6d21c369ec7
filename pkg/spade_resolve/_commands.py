# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""The scans behind each CLI command. Every command turns a :class:`RunConfig` into a :class:`Table`."""
from __future__ import annotations

import logging
import math
import pathlib
from functools import partial
from typing import Any, Awaitable, Callable

import anyio
import numpy as np

from ._async_utils import map_in_threads
from ._config import RunConfig
from ._crosstalk import CrosstalkKind, identity_crosstalk, strength_for_mu
from ._data_utils import log_grid
from ._ensemble import (
    EnsembleCurve,
    EnsembleRun,
    EnsembleSample,
    EnsembleSpec,
    EnsembleSummary,
    map_ensemble,
    write_samples_csv,
)
from ._exceptions import NoSolutionError, NoThresholdError
from ._fisher import asymptotic_band, asymptotic_q0_ensemble_stats, di_fisher_curve, spade_fisher_curve
from ._io import Table, package_version
from ._photonics import canonicalize
from ._resolution import (
    MrdQuery,
    ThresholdQuery,
    constant_curve,
    find_threshold,
    fraction_at_k,
    k_ratio_to_fraction,
    solve_mrd,
)
from ._types import FisherCurve

logger = logging.getLogger(__name__)

BOX_COLUMNS = ["median", "q1", "q3", "whisker_lo", "whisker_hi", "n_outliers", "outliers"]


class _MemoCurve:
    """Remembers every value of a Fisher curve so repeated scans of the same grid are free."""

    def __init__(self, curve: FisherCurve) -> None:
        self._curve = curve
        self._values: dict[float, float] = {}

    def __call__(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
        missing = sorted({float(x) for x in xs} - set(self._values))
        if missing:
            self._values.update(zip(missing, np.asarray(self._curve(np.array(missing)), dtype=np.float64).tolist()))
        return np.array([self._values[float(x)] for x in xs])


def _meta(config: RunConfig, **extra: Any) -> dict[str, Any]:
    return {
        "command": config.command,
        "version": package_version(),
        "seed": config.seed,
        "workers": config.workers,
        "config": config.to_dict(),
        **extra,
    }


def _box_columns(summary: EnsembleSummary) -> dict[str, Any]:
    return {
        "median": summary.median,
        "q1": summary.q1,
        "q3": summary.q3,
        "whisker_lo": summary.whisker_lo,
        "whisker_hi": summary.whisker_hi,
        "n_outliers": len(summary.outliers),
        "outliers": list(summary.outliers),
    }


async def _dump(config: RunConfig, run: EnsembleRun, label: str, key: Callable[[Any], Any] | None = None) -> None:
    if not config.params.dump_samples:
        return
    directory = pathlib.Path(config.params.dump_samples).expanduser()
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{config.command}-{label}.csv"
    await write_samples_csv(path, run, key)
    logger.info("Wrote per-sample values to %s", path)


async def cmd_fisher_scan(config: RunConfig) -> Table:
    """Ensemble mean and spread of SPADE ``w²F`` over an x grid, with direct imaging, ideal SPADE and the asymptote."""
    p = config.params
    xs = log_grid(p.x_min, p.x_max, p.x_points)
    theta, nu = canonicalize(p.theta, p.nu)
    spec = EnsembleSpec(sample_count=p.samples, seed=p.seed, D=p.dim, p_c=p.pc, nu=nu, theta=theta)

    def evaluate(sample: EnsembleSample) -> tuple[np.ndarray, np.ndarray]:
        return sample.crosstalk.matrix, spade_fisher_curve(sample.crosstalk, xs, sample.nu, sample.theta)

    run = await map_ensemble(spec, evaluate, workers=p.workers)
    run.require_values(f"p_c={p.pc}")
    curves = np.stack(run.values(lambda v: v[1]))
    mean, std = curves.mean(axis=0), curves.std(axis=0)
    di = await map_in_threads(lambda x: float(di_fisher_curve([x], nu, theta)[0]), xs.tolist(), p.workers)
    ideal = spade_fisher_curve(identity_crosstalk(p.dim), xs, nu, theta)
    asymptote, _ = asymptotic_q0_ensemble_stats(nu, theta)
    band_lo, band_hi = asymptotic_band(nu, theta)

    averaged = EnsembleCurve(np.stack(run.values(lambda v: v[0])), nu, theta)
    query = ThresholdQuery(averaged, partial(di_fisher_curve, nu=nu, theta=theta), (p.x_min, p.x_max))
    xc = await anyio.to_thread.run_sync(_threshold_or_none, query)

    table = Table(
        columns=[
            "x",
            "w2F_spade_mean",
            "w2F_spade_std",
            "w2F_di",
            "w2F_ideal",
            "w2F_asymptote",
            "w2F_band_lo",
            "w2F_band_hi",
        ],
        meta=_meta(config, failed_samples=run.failed, xc_averaged=xc),
    )
    for i, x in enumerate(xs):
        table.append(
            x=x,
            w2F_spade_mean=mean[i],
            w2F_spade_std=std[i],
            w2F_di=di[i],
            w2F_ideal=ideal[i],
            w2F_asymptote=asymptote,
            w2F_band_lo=band_lo,
            w2F_band_hi=band_hi,
        )
    return table


def _threshold_or_none(query: ThresholdQuery) -> float | None:
    try:
        return find_threshold(query)
    except NoThresholdError as e:
        logger.info("No threshold of the ensemble-averaged curve: %s", e)
        return None


def _dmin(curve: FisherCurve, photons: float, window: tuple[float, float]) -> float:
    return 2.0 * solve_mrd(MrdQuery(photons, curve, window))


def _mrd_rows(
    nu: float,
    photons: list[float],
    window: tuple[float, float],
    theta: float,
    matrices: np.ndarray | None,
    average: str,
) -> list[dict[str, Any]]:
    di_curve = _MemoCurve(partial(di_fisher_curve, nu=nu, theta=theta))
    if matrices is None:
        curves: list[FisherCurve] = [constant_curve(1.0)]
    elif average == "fisher":
        curves = [_MemoCurve(EnsembleCurve(matrices, nu, theta))]
    else:
        curves = [_MemoCurve(partial(spade_fisher_curve, m, nu=nu, theta=theta)) for m in matrices]
    rows = []
    for n in photons:
        status = "ok"
        dmins = []
        for curve in curves:
            try:
                dmins.append(_dmin(curve, n, window))
            except NoSolutionError:
                pass
        dmin_spade = float(np.mean(dmins)) if dmins else None
        if not dmins:
            status = "no_root_spade"
        elif len(dmins) < len(curves):
            status = f"partial:{len(curves) - len(dmins)}"
        try:
            dmin_di = _dmin(di_curve, n, window)
        except NoSolutionError:
            dmin_di = None
            status = "no_root" if dmin_spade is None else "no_root_di"
        wins = None if dmin_spade is None or dmin_di is None else dmin_spade < dmin_di
        rows.append(
            {
                "nu": nu,
                "N": n,
                "dmin_spade_over_w": dmin_spade,
                "dmin_di_over_w": dmin_di,
                "spade_wins": wins,
                "status": status,
            }
        )
    return rows


async def cmd_mrd_scan(config: RunConfig) -> Table:
    """Minimal resolvable distance of SPADE and direct imaging over a ν grid and photon numbers.

    ``average="fisher"`` solves with the ensemble-averaged Fisher information; ``average="mrd"`` solves
    per sampled matrix and averages the distances. ``ideal`` replaces SPADE by the constant ``w²F = 1``.
    """
    p = config.params
    nus = list(p.nu) if p.nu else np.linspace(p.nu_min, p.nu_max, p.nu_points).tolist()
    window = (p.x_min, p.x_max)
    matrices = None
    if not p.ideal:
        spec = EnsembleSpec(sample_count=p.samples, seed=p.seed, D=p.dim, p_c=p.pc, theta=p.theta)
        run = await map_ensemble(spec, lambda s: s.crosstalk.matrix, workers=p.workers)
        run.require_values(f"p_c={p.pc}")
        matrices = np.stack(run.values())

    def rows_for(nu: float) -> list[dict[str, Any]]:
        theta, nu = canonicalize(p.theta, nu)
        return _mrd_rows(nu, list(p.photons), window, theta, matrices, p.average)

    table = Table(
        columns=["nu", "N", "dmin_spade_over_w", "dmin_di_over_w", "spade_wins", "status"],
        meta=_meta(config),
    )
    for rows in await map_in_threads(rows_for, nus, p.workers):
        for row in rows:
            table.append(**row)
    return table


async def cmd_crosstalk_stats(config: RunConfig) -> Table:
    """Measured crosstalk strength against its lowest-order prediction over a μ grid.

    The same seed is used for every μ, so all grid points share their crosstalk directions.
    """
    p = config.params
    table = Table(columns=["mu", "pc_predicted", "pc_mean", "pc_std", "failed"], meta=_meta(config))
    for mu in p.mu:
        spec = EnsembleSpec(sample_count=p.samples, seed=p.seed, D=p.dim, mu=mu)
        run = await map_ensemble(spec, lambda s: s.crosstalk.measured_strength, workers=p.workers)
        await _dump(config, run, f"mu{mu:g}")
        summary = run.summary()
        table.append(
            mu=mu,
            pc_predicted=strength_for_mu(mu, p.dim),
            pc_mean=summary.mean,
            pc_std=summary.std,
            failed=summary.failed,
        )
    return table


async def cmd_optimal_region(config: RunConfig) -> Table:
    """Box statistics of the ``k = x/√p_c`` needed to reach a fraction of the maximal Fisher information.

    Rows also report how much of the maximum is available at ``k = k_check``.
    """
    p = config.params
    fractions = list(p.fraction)
    family = CrosstalkKind.IDENTITY if p.identity else CrosstalkKind.RANDOM
    table = Table(
        columns=["pc", "fraction", "mean", *BOX_COLUMNS, "failed", "k_check", "fraction_at_k_mean", "share_at_k"],
        meta=_meta(config),
    )
    for pc in p.pc:
        spec = EnsembleSpec(
            sample_count=p.samples,
            seed=p.seed,
            D=p.dim,
            p_c=pc,
            nu=p.nu,
            randomize_nu=p.randomize_nu,
            theta=p.theta,
            family=family,
        )

        def evaluate(sample: EnsembleSample, pc: float = pc) -> dict[str, Any]:
            c = sample.crosstalk
            return {
                "k": [k_ratio_to_fraction(c, f, pc, sample.nu, sample.theta) for f in fractions],
                "at_k": fraction_at_k(c, p.k_check, pc, sample.nu, sample.theta),
            }

        run = await map_ensemble(spec, evaluate, workers=p.workers)
        run.require_values(f"p_c={pc}")
        at_k = np.array(run.values(lambda v: v["at_k"]))
        for i, fraction in enumerate(fractions):
            await _dump(config, run, f"pc{pc:g}-fraction{fraction:g}", key=lambda v, i=i: v["k"][i])
            summary = run.summary(key=lambda v, i=i: v["k"][i])
            table.append(
                pc=pc,
                fraction=fraction,
                mean=summary.mean,
                **_box_columns(summary),
                failed=summary.failed,
                k_check=p.k_check,
                fraction_at_k_mean=float(at_k.mean()),
                share_at_k=float(np.mean(at_k >= fraction)),
            )
    return table


def _threshold_ratio(sample: EnsembleSample, k_min: float, k_max: float, x_max: float) -> float | None:
    scale = math.sqrt(sample.p_c)
    window = (k_min * scale, min(k_max * scale, x_max))
    query = ThresholdQuery(
        partial(spade_fisher_curve, sample.crosstalk, nu=sample.nu, theta=sample.theta),
        partial(di_fisher_curve, nu=sample.nu, theta=sample.theta),
        window,
    )
    try:
        return find_threshold(query) / scale
    except NoThresholdError:
        logger.debug("Sample %d never overtakes direct imaging", sample.index)
        return None


async def cmd_threshold_scan(config: RunConfig) -> Table:
    """SPADE vs direct imaging thresholds, in units of ``√p_c``, per ν and crosstalk strength.

    ``xc_over_sqrt_pc_mean`` is the threshold of the crosstalk-averaged SPADE curve. The box columns and
    ``xc_sample_mean`` describe the thresholds of the individual samples, where a sample whose curve never
    overtakes direct imaging is counted in ``no_threshold``. In μ-interval mode every sample draws its
    own ``μ`` and is scaled by its own ``√p_c``; there is no common averaged curve, so the headline
    column falls back to the per-sample mean.
    """
    p = config.params
    table = Table(
        columns=[
            "nu",
            "pc",
            "xc_over_sqrt_pc_mean",
            "xc_sample_mean",
            *BOX_COLUMNS,
            "no_threshold",
            "failed",
        ],
        meta=_meta(config),
    )
    strengths: list[float | None] = [None] if p.mu_interval else list(p.pc)
    for pc in strengths:
        for nu in p.nu:
            theta, nu_c = canonicalize(p.theta, nu)
            spec = EnsembleSpec(
                sample_count=p.samples,
                seed=p.seed,
                D=p.dim,
                p_c=pc,
                mu_interval=tuple(p.mu_interval) if p.mu_interval else None,
                nu=nu_c,
                theta=theta,
            )
            evaluate = partial(_threshold_ratio, k_min=p.k_min, k_max=p.k_max, x_max=p.x_max)
            run = await map_ensemble(spec, lambda s: (evaluate(s), s.crosstalk.matrix), workers=p.workers)
            label = "mu-interval" if pc is None else f"pc{pc:g}"
            await _dump(config, run, f"nu{nu:g}-{label}", key=lambda v: v[0])
            summary = run.summary(key=lambda v: v[0])
            no_threshold = sum(v[0] is None for v in run.values())
            headline = summary.mean
            if pc is not None:
                run.require_values(f"p_c={pc}, nu={nu}")
                headline = await anyio.to_thread.run_sync(
                    _averaged_threshold, run, pc, nu_c, theta, p.k_min, p.k_max, p.x_max
                )
            table.append(
                nu=nu,
                pc="mu-interval" if pc is None else pc,
                xc_over_sqrt_pc_mean=headline,
                xc_sample_mean=summary.mean,
                **_box_columns(summary),
                no_threshold=no_threshold,
                failed=run.failed,
            )
    return table


def _averaged_threshold(
    run: EnsembleRun, pc: float, nu: float, theta: float, k_min: float, k_max: float, x_max: float
) -> float | None:
    scale = math.sqrt(pc)
    curve = EnsembleCurve(np.stack(run.values(lambda v: v[1])), nu, theta)
    window = (k_min * scale, min(k_max * scale, x_max))
    xc = _threshold_or_none(ThresholdQuery(curve, partial(di_fisher_curve, nu=nu, theta=theta), window))
    return None if xc is None else xc / scale


COMMAND_HANDLERS: dict[str, Callable[[RunConfig], Awaitable[Table]]] = {
    "fisher-scan": cmd_fisher_scan,
    "mrd-scan": cmd_mrd_scan,
    "crosstalk-stats": cmd_crosstalk_stats,
    "optimal-region": cmd_optimal_region,
    "threshold-scan": cmd_threshold_scan,
}


async def run_command(config: RunConfig) -> Table:
    """Dispatch ``config`` to the scan of its command."""
    logger.info("Running %s with seed %d on %d worker(s)", config.command, config.seed, config.workers)
    return await COMMAND_HANDLERS[config.command](config)
