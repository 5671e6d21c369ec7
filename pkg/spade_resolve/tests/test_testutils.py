# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import math
import os

import pytest

from spade_resolve._testutils import central_difference, set_env


def test_set_env():
    os.environ["SPADE_RESOLVE_TEST_KEEP"] = "1"
    try:
        with set_env(SPADE_RESOLVE_TEST_NEW="a", SPADE_RESOLVE_TEST_KEEP=None):
            assert os.environ["SPADE_RESOLVE_TEST_NEW"] == "a"
            assert "SPADE_RESOLVE_TEST_KEEP" not in os.environ
        assert "SPADE_RESOLVE_TEST_NEW" not in os.environ
        assert os.environ["SPADE_RESOLVE_TEST_KEEP"] == "1"
    finally:
        os.environ.pop("SPADE_RESOLVE_TEST_KEEP", None)


def test_set_env_restores_after_error():
    with pytest.raises(RuntimeError):
        with set_env(SPADE_RESOLVE_TEST_NEW="a"):
            raise RuntimeError
    assert "SPADE_RESOLVE_TEST_NEW" not in os.environ


def test_central_difference():
    assert central_difference(math.sin, 0.3) == pytest.approx(math.cos(0.3), rel=1e-8)
