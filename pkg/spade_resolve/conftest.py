# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import numpy as np
import pytest

from spade_resolve._config import LOG_LEVEL_ENV, WORKERS_ENV


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keep the caller's SPADE_RESOLVE_* settings out of every test."""
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def config_file(tmp_path):
    def write(text: str, name: str = "run.conf"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
