# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
from __future__ import annotations

from os import PathLike
from typing import TYPE_CHECKING, Any, Protocol, Union, runtime_checkable

import numpy as np
import numpy.typing as npt

if TYPE_CHECKING:
    from ._ensemble import EnsembleSample

PathType = Union[str, "PathLike[str]"]

# Anything numpy can turn into a float64 array of separations.
XValues = Union[float, "npt.ArrayLike"]

# A random stream, or a seed to build one from.
RngLike = Union[np.random.Generator, int]


@runtime_checkable
class FisherCurve(Protocol):
    """A vectorised map from half-separations x to w²F."""

    def __call__(self, xs: np.ndarray, /) -> np.ndarray: ...


class SampleEvaluator(Protocol):
    """A per-sample function run by the ensemble worker pool."""

    def __call__(self, sample: EnsembleSample, /) -> Any: ...
