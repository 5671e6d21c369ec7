# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
import json
import math
import subprocess
import sys

import pytest

import spade_resolve._ensemble
from spade_resolve import cli
from spade_resolve.cli import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main

FAST_FISHER = ["fisher-scan", "--samples", "6", "--x-points", "5", "--x-min", "0.01", "--x-max", "0.2"]


def rows(path):
    return [line for line in path.read_text().splitlines() if not line.startswith("#")]


def test_help(capsys):
    assert main(["--help"]) == EXIT_OK
    assert "threshold-scan" in capsys.readouterr().out


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("spade-resolve ")


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["plot"],
        ["fisher-scan", "--bogus"],
        ["fisher-scan", "--nu", "abc"],
        ["mrd-scan", "--average", "median"],
    ],
)
def test_usage_errors(argv):
    assert main(argv) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["fisher-scan", "--nu", "2"],
        ["fisher-scan", "--x-min", "0.5", "--x-max", "0.1"],
        ["threshold-scan", "--mu-interval", "0.8", "0.1"],
        ["crosstalk-stats", "--samples", "0"],
        ["fisher-scan", "--dim", "1"],
    ],
)
def test_config_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err.startswith("spade-resolve: error:")


def test_missing_config_file(tmp_path):
    assert main(["fisher-scan", "--config", str(tmp_path / "missing.conf")]) == EXIT_USAGE


def test_computation_failure(monkeypatch, capsys):
    async def explode(config):
        raise ArithmeticError("no convergence")

    monkeypatch.setattr(cli, "run_command", explode)
    assert main(["crosstalk-stats"]) == EXIT_FAILURE
    assert "crosstalk-stats failed: ArithmeticError: no convergence" in capsys.readouterr().err


def test_every_sample_failed(monkeypatch, capsys):
    def broken(spec, index):
        raise ArithmeticError("bad draw")

    monkeypatch.setattr(spade_resolve._ensemble, "make_sample", broken)
    assert main(["fisher-scan", "--samples", "3", "--x-points", "5"]) == EXIT_FAILURE
    assert "EmptyEnsembleError: All 3 ensemble samples failed" in capsys.readouterr().err


def test_flags_default_to_none():
    args = build_parser().parse_args(["optimal-region"])
    assert args.randomize_nu is None
    assert args.identity is None
    args = build_parser().parse_args(["optimal-region", "--no-randomize-nu", "--identity"])
    assert args.randomize_nu is False
    assert args.identity is True


def test_ideal_mrd(tmp_path):
    out = tmp_path / "mrd.json"
    argv = ["mrd-scan", "--ideal", "--nu", "0.5", "--photons", "100", "10000", "--format", "json", "--out", str(out)]
    assert main(argv) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["meta"]["command"] == "mrd-scan"
    assert [r["N"] for r in document["rows"]] == [100.0, 10000.0]
    for row in document["rows"]:
        assert row["dmin_spade_over_w"] == pytest.approx(1 / math.sqrt(row["N"]), rel=1e-6)
        assert row["spade_wins"] is True
        assert row["status"] == "ok"


def test_fisher_scan_without_crosstalk(tmp_path):
    out = tmp_path / "fisher.json"
    assert main([*FAST_FISHER, "--pc", "0", "--format", "json", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["meta"]["failed_samples"] == 0
    assert len(document["rows"]) == 5
    for row in document["rows"]:
        assert row["w2F_spade_mean"] == pytest.approx(row["w2F_ideal"], abs=1e-12)
        assert row["w2F_spade_std"] == pytest.approx(0.0, abs=1e-12)
        assert 0 < row["w2F_di"] <= 1


def test_same_seed_same_output(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert main([*FAST_FISHER, "--seed", "5", "--out", str(a)]) == EXIT_OK
    assert main([*FAST_FISHER, "--seed", "5", "--workers", "3", "--out", str(b)]) == EXIT_OK
    assert main([*FAST_FISHER, "--seed", "6", "--out", str(c)]) == EXIT_OK
    assert rows(a) == rows(b)
    assert rows(a) != rows(c)
    assert "#   seed: 5" in a.read_text()


def test_config_file_and_flags(tmp_path, config_file):
    path = config_file("mu = [0.05]\ndim = 2\nsamples = 20\nseed = 9\n")
    out = tmp_path / "stats.json"
    assert main(["crosstalk-stats", "--config", str(path), "--samples", "10", "--format", "json", "--out", str(out)]) == 0
    meta = json.loads(out.read_text())["meta"]
    assert meta["seed"] == 9
    assert meta["config"]["samples"] == 10
    assert meta["config"]["dim"] == 2


def test_workers_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("SPADE_RESOLVE_WORKERS", "2")
    out = tmp_path / "stats.json"
    assert main(["crosstalk-stats", "--mu", "0.1", "--samples", "5", "--format", "json", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["meta"]["workers"] == 2


def test_dump_samples(tmp_path):
    dump = tmp_path / "dump"
    argv = ["crosstalk-stats", "--mu", "0.05", "0.1", "--samples", "7", "--dump-samples", str(dump)]
    assert main([*argv, "--out", str(tmp_path / "stats.csv")]) == EXIT_OK
    files = sorted(p.name for p in dump.iterdir())
    assert files == ["crosstalk-stats-mu0.05.csv", "crosstalk-stats-mu0.1.csv"]
    assert len((dump / files[0]).read_text().splitlines()) == 8


def test_balanced_sources_are_always_ahead(tmp_path):
    out = tmp_path / "threshold.json"
    argv = ["threshold-scan", "--nu", "0.5", "--pc", "0.01", "--samples", "8", "--format", "json", "--out", str(out)]
    assert main(argv) == EXIT_OK
    [row] = json.loads(out.read_text())["rows"]
    assert row["median"] == 0.0
    assert row["no_threshold"] == 0
    assert row["xc_over_sqrt_pc_mean"] == 0.0


def test_stdout(capsys):
    assert main(["crosstalk-stats", "--mu", "0.1", "--samples", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "mu,pc_predicted,pc_mean,pc_std,failed" in out.splitlines()


def test_module_entry_point():
    result = subprocess.run(
        [sys.executable, "-m", "spade_resolve", "--version"], capture_output=True, text=True, check=False
    )
    assert result.returncode == 0
    assert result.stdout.startswith("spade-resolve ")
