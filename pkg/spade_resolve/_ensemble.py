# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Seeded Monte-Carlo ensembles over crosstalk matrices and their summary statistics."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import anyio
import numpy as np
import numpy.typing as npt

from ._async_utils import gather_in_threads
from ._crosstalk import CrosstalkKind, CrosstalkMatrix, sample_crosstalk, sample_mu_log_uniform
from ._exceptions import EmptyEnsembleError, InvalidParameterError
from ._fisher import spade_fisher_curve
from ._types import PathType, SampleEvaluator, XValues

logger = logging.getLogger(__name__)

MAX_SEED = 2**64
# Largest number of (sample, x) pairs evaluated in one vectorised block.
_CURVE_BLOCK = 20_000


def sample_seed_sequence(seed: int, index: int) -> np.random.SeedSequence:
    """The seed sequence of sample ``index``; equal to child ``index`` of ``SeedSequence(seed).spawn``."""
    return np.random.SeedSequence(int(seed), spawn_key=(int(index),))


def sub_seed(seed: int, index: int) -> int:
    """A 64-bit integer identifying the random stream of sample ``index``, reported in sample dumps."""
    return int(sample_seed_sequence(seed, index).generate_state(1, np.uint64)[0])


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """The random stream of sample ``index``. It depends only on ``(seed, index)``, never on scheduling."""
    return np.random.default_rng(sample_seed_sequence(seed, index))


@dataclass(frozen=True)
class EnsembleSpec:
    """What to sample for each ensemble member.

    Exactly one of ``p_c``, ``mu`` and ``mu_interval`` sets the crosstalk strength of the random family.
    Per sample the stream is consumed in a fixed order: ``μ`` (interval mode), then the crosstalk
    direction, then ``ν`` (randomised mode). Ensembles that differ only in ``nu`` therefore share
    their crosstalk matrices.
    """

    sample_count: int
    seed: int = 0
    D: int = 3  # noqa: N815
    p_c: float | None = None
    mu: float | None = None
    mu_interval: tuple[float, float] | None = None
    nu: float = 0.5
    randomize_nu: bool = False
    nu_range: tuple[float, float] = (0.5, 1.0)
    theta: float = 0.0
    family: CrosstalkKind = CrosstalkKind.RANDOM

    def __post_init__(self):
        if int(self.sample_count) != self.sample_count or self.sample_count < 1:
            raise InvalidParameterError(f"sample_count must be a positive integer, got {self.sample_count}")
        if int(self.seed) != self.seed or not (0 <= self.seed < MAX_SEED):
            raise InvalidParameterError(f"seed must be an integer in [0, 2**64), got {self.seed}")
        object.__setattr__(self, "family", CrosstalkKind(self.family))
        strengths = [s for s in (self.p_c, self.mu, self.mu_interval) if s is not None]
        if self.family is CrosstalkKind.RANDOM and len(strengths) != 1:
            raise InvalidParameterError("Set exactly one of p_c, mu and mu_interval for random crosstalk")
        if self.mu_interval is not None:
            lo, hi = self.mu_interval
            if not (0 < lo < hi):
                raise InvalidParameterError(f"mu_interval must satisfy 0 < lo < hi, got {self.mu_interval}")
        lo, hi = self.nu_range
        if not (0.0 <= lo <= hi <= 1.0):
            raise InvalidParameterError(f"nu_range must lie within [0, 1], got {self.nu_range}")
        if not (0.0 <= self.nu <= 1.0):
            raise InvalidParameterError(f"nu must be in [0, 1], got {self.nu}")


@dataclass(frozen=True, eq=False)
class EnsembleSample:
    """One ensemble member as handed to an evaluator."""

    index: int
    sub_seed: int
    rng: np.random.Generator
    crosstalk: CrosstalkMatrix
    nu: float
    theta: float
    p_c: float
    mu: float


def make_sample(spec: EnsembleSpec, index: int) -> EnsembleSample:
    """Deterministically build sample ``index`` of ``spec``."""
    rng = sample_rng(spec.seed, index)
    mu = spec.mu
    if spec.mu_interval is not None:
        mu = sample_mu_log_uniform(rng, *spec.mu_interval)
    crosstalk = sample_crosstalk(spec.family, spec.D, spec.p_c or 0.0, rng, mu=mu)
    nu = float(rng.uniform(*spec.nu_range)) if spec.randomize_nu else spec.nu
    return EnsembleSample(
        index=index,
        sub_seed=sub_seed(spec.seed, index),
        rng=rng,
        crosstalk=crosstalk,
        nu=nu,
        theta=spec.theta,
        p_c=crosstalk.nominal_strength,
        mu=crosstalk.mu,
    )


@dataclass(frozen=True)
class SampleOutcome:
    index: int
    sub_seed: int
    value: Any
    status: str = "ok"
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True, eq=False)
class EnsembleSummary:
    """Summary statistics of a scalar over an ensemble, as drawn in box-and-whisker plots.

    ``std`` is the population standard deviation. Whiskers reach the most extreme values within
    1.5 interquartile ranges of the quartiles; anything beyond is an outlier.
    """

    mean: float
    std: float
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple[float, ...] = ()
    count: int = 0
    failed: int = 0
    values: np.ndarray | None = field(default=None, repr=False)

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    @property
    def standard_error(self) -> float:
        return self.std / math.sqrt(self.count) if self.count else math.nan

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean,
            "std": self.std,
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_lo": self.whisker_lo,
            "whisker_hi": self.whisker_hi,
            "outliers": list(self.outliers),
            "count": self.count,
            "failed": self.failed,
        }


def quantile(values: npt.ArrayLike, p: float) -> float:
    """Linear-interpolation quantile, ``sorted[(n - 1) p]`` interpolated between neighbours.

    Examples:
        >>> quantile([1, 2, 3, 4], 0.25)
        1.75
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise InvalidParameterError("Cannot take a quantile of an empty list")
    if not (0.0 <= p <= 1.0):
        raise InvalidParameterError(f"Quantile level must be in [0, 1], got {p}")
    return float(np.quantile(arr, p, method="linear"))


def summarize(values: npt.ArrayLike, failed: int = 0, keep_values: bool = True) -> EnsembleSummary:
    """Summarise a list of per-sample scalars. An empty list gives NaN statistics."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        nan = math.nan
        return EnsembleSummary(nan, nan, nan, nan, nan, nan, nan, (), 0, failed, arr if keep_values else None)
    q1, median, q3 = (quantile(arr, p) for p in (0.25, 0.5, 0.75))
    fence_lo, fence_hi = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
    inside = arr[(arr >= fence_lo) & (arr <= fence_hi)]
    outliers = tuple(float(v) for v in arr[(arr < fence_lo) | (arr > fence_hi)])
    return EnsembleSummary(
        mean=float(np.mean(arr)),
        std=float(np.std(arr)),
        median=median,
        q1=q1,
        q3=q3,
        whisker_lo=float(inside.min()),
        whisker_hi=float(inside.max()),
        outliers=outliers,
        count=int(arr.size),
        failed=failed,
        values=arr if keep_values else None,
    )


@dataclass(frozen=True, eq=False)
class EnsembleRun:
    """Every per-sample outcome of an ensemble, in sample order."""

    spec: EnsembleSpec
    outcomes: list[SampleOutcome]

    @property
    def failed(self) -> int:
        return sum(not o.ok for o in self.outcomes)

    def values(self, key: Callable[[Any], Any] | None = None) -> list[Any]:
        """Values of the successful samples, optionally projected through ``key``."""
        return [key(o.value) if key else o.value for o in self.outcomes if o.ok]

    def require_values(self, label: str | None = None) -> None:
        """Raise :class:`EmptyEnsembleError` if no sample succeeded."""
        if not any(o.ok for o in self.outcomes):
            where = f" for {label}" if label else ""
            raise EmptyEnsembleError(f"All {self.failed} ensemble samples failed{where}", failed=self.failed)

    def summary(self, key: Callable[[Any], float] | None = None, keep_values: bool = True) -> EnsembleSummary:
        """Summarise successful samples; samples where ``key`` yields None count as failed."""
        projected = self.values(key)
        kept = [v for v in projected if v is not None]
        return summarize(kept, failed=self.failed + len(projected) - len(kept), keep_values=keep_values)


def _evaluate_sample(spec: EnsembleSpec, evaluator: SampleEvaluator, index: int) -> SampleOutcome:
    seed = sub_seed(spec.seed, index)
    try:
        value = evaluator(make_sample(spec, index))
    except Exception as e:
        logger.warning("Ensemble sample %d (sub-seed %d) failed: %s", index, seed, e)
        return SampleOutcome(index=index, sub_seed=seed, value=None, status="failed", error=f"{type(e).__name__}: {e}")
    return SampleOutcome(index=index, sub_seed=seed, value=value)


async def map_ensemble(spec: EnsembleSpec, evaluator: SampleEvaluator, *, workers: int = 1) -> EnsembleRun:
    """Evaluate every sample of ``spec`` on a pool of worker threads.

    Args:
        spec: The ensemble description.
        evaluator: Called with each :class:`EnsembleSample`; may return anything.
        workers: Number of threads evaluating samples concurrently.

    Returns:
        The outcomes in sample order, identical for any ``workers``.
    """
    outcomes = await gather_in_threads(
        lambda index: _evaluate_sample(spec, evaluator, index), spec.sample_count, workers=workers
    )
    run = EnsembleRun(spec=spec, outcomes=outcomes)
    logger.debug("Ensemble of %d samples done, %d failed", spec.sample_count, run.failed)
    return run


async def run_ensemble(
    spec: EnsembleSpec,
    evaluator: Callable[[EnsembleSample], float],
    *,
    workers: int = 1,
    keep_values: bool = True,
) -> EnsembleSummary:
    """Evaluate a scalar per sample and summarise it. Failed samples are excluded and counted.

    Examples:
        >>> spec = EnsembleSpec(sample_count=100, seed=1, D=2, p_c=1e-3)
        >>> summary = await run_ensemble(spec, lambda s: s.crosstalk.measured_strength)
    """
    run = await map_ensemble(spec, evaluator, workers=workers)
    return run.summary(keep_values=keep_values)


@dataclass(frozen=True, eq=False)
class EnsembleCurve:
    """Sampled crosstalk matrices evaluated as an ensemble-averaged SPADE Fisher curve.

    Calling the curve returns the mean ``w²F`` over samples for every ``x``.
    """

    matrices: np.ndarray
    nu: float
    theta: float = 0.0

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def per_sample(self, xs: XValues) -> np.ndarray:
        """``w²F`` of every sample, shape ``(M, len(xs))``."""
        xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
        step = max(1, _CURVE_BLOCK // len(self))
        return np.concatenate(
            [spade_fisher_curve(self.matrices, xs[i : i + step], self.nu, self.theta) for i in range(0, xs.size, step)],
            axis=-1,
        )

    def __call__(self, xs: XValues) -> np.ndarray:
        return np.mean(self.per_sample(xs), axis=0)

    def std(self, xs: XValues) -> np.ndarray:
        return np.std(self.per_sample(xs), axis=0)

    def with_nu(self, nu: float) -> EnsembleCurve:
        """The same matrices seen by sources of another brightness ratio."""
        return EnsembleCurve(self.matrices, nu, self.theta)


async def sample_matrices(spec: EnsembleSpec, *, workers: int = 1) -> list[CrosstalkMatrix]:
    """Draw the crosstalk matrices of every ensemble member."""
    run = await map_ensemble(spec, lambda sample: sample.crosstalk, workers=workers)
    return run.values()


async def ensemble_curve(spec: EnsembleSpec, *, workers: int = 1) -> EnsembleCurve:
    """Sample the ensemble and wrap it as an :class:`EnsembleCurve` for ``spec.nu`` and ``spec.theta``.

    Raises:
        EmptyEnsembleError: If no sample produced a matrix.
    """
    run = await map_ensemble(spec, lambda sample: sample.crosstalk.matrix, workers=workers)
    run.require_values()
    return EnsembleCurve(np.stack(run.values()), spec.nu, spec.theta)


async def write_samples_csv(path: PathType, run: EnsembleRun, key: Callable[[Any], Any] | None = None) -> None:
    """Dump one row per sample: ``sample_index, sub_seed, value, status``."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["sample_index", "sub_seed", "value", "status"])
    for outcome in run.outcomes:
        value = outcome.value if (key is None or not outcome.ok) else key(outcome.value)
        writer.writerow([outcome.index, outcome.sub_seed, "" if value is None else value, outcome.status])
    async with await anyio.open_file(path, "w", encoding="utf-8", newline="") as fh:
        await fh.write(buffer.getvalue())
