# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""The `spade_resolve` asynchronous API.

Ensembles and scans run on worker threads driven by an anyio task group, so these coroutines
work under both asyncio and trio.
"""
from .._commands import (
    cmd_crosstalk_stats,
    cmd_fisher_scan,
    cmd_mrd_scan,
    cmd_optimal_region,
    cmd_threshold_scan,
    run_command,
)
from .._config import load_run_config, read_config_file
from .._ensemble import (
    ensemble_curve,
    map_ensemble,
    run_ensemble,
    sample_matrices,
    write_samples_csv,
)
from .._io import read_table, write_table

__all__ = [
    "cmd_crosstalk_stats",
    "cmd_fisher_scan",
    "cmd_mrd_scan",
    "cmd_optimal_region",
    "cmd_threshold_scan",
    "ensemble_curve",
    "load_run_config",
    "map_ensemble",
    "read_config_file",
    "read_table",
    "run_command",
    "run_ensemble",
    "sample_matrices",
    "write_samples_csv",
    "write_table",
]
