# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""The ``spade-resolve`` command line.

Exit codes are 0 on success, 1 when a computation fails and 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from typing import Any

import anyio

from ._commands import run_command
from ._config import COMMANDS, load_run_config
from ._exceptions import ConfigError, InvalidDimensionError, InvalidParameterError
from ._io import package_version, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

HELP = {
    "fisher-scan": "Ensemble SPADE Fisher information against direct imaging over an x grid",
    "mrd-scan": "Minimal resolvable distance of SPADE and direct imaging over ν and photon numbers",
    "crosstalk-stats": "Measured crosstalk strength against its prediction over a μ grid",
    "optimal-region": "k = x/√p_c needed to reach a fraction of the maximal Fisher information",
    "threshold-scan": "Separation where SPADE overtakes direct imaging, in units of √p_c",
}


def _flag(parser: argparse.ArgumentParser, *names: str, **kwargs: Any) -> None:
    # Every flag defaults to None so that unset flags never mask config file values
    parser.add_argument(*names, default=None, **kwargs)


def _switch(parser: argparse.ArgumentParser, name: str, help: str) -> None:  # noqa: A002
    parser.add_argument(name, action="store_const", const=True, default=None, help=help)


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _flag(common, "--config", help="Flat key=value config file, or a YAML mapping with a .yaml suffix")
    _flag(common, "--seed", type=int, help="Master seed, an integer in [0, 2**64)")
    _flag(common, "--workers", type=int, help="Worker threads (default: $SPADE_RESOLVE_WORKERS or 1)")
    _flag(common, "--out", help="Output path, standard output when omitted")
    _flag(common, "--format", choices=["csv", "json"], help="Output format (default: csv)")
    _flag(common, "--log-level", help="Logging level (default: $SPADE_RESOLVE_LOG_LEVEL or WARNING)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spade-resolve",
        description="Resolution of two incoherent point sources by spatial-mode demultiplexing under crosstalk.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {package_version()}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    common = _common_parser()
    subparsers = {
        name: sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name]) for name in COMMANDS
    }

    p = subparsers["fisher-scan"]
    _flag(p, "--nu", type=float, help="Relative brightness of the source at +x")
    _flag(p, "--theta", type=float, help="Source axis angle in radians")
    _flag(p, "--pc", type=float, help="Crosstalk strength")
    _flag(p, "--dim", type=int, help="Detected modes per axis")
    _flag(p, "--samples", type=int, help="Crosstalk matrices in the ensemble")
    _flag(p, "--x-min", type=float, help="Smallest half-separation in units of the PSF width")
    _flag(p, "--x-max", type=float, help="Largest half-separation")
    _flag(p, "--x-points", type=int, help="Points of the log-spaced x grid")

    p = subparsers["mrd-scan"]
    _flag(p, "--nu", type=float, nargs="+", help="Explicit ν values; overrides the ν grid")
    _flag(p, "--nu-min", type=float, help="Lower end of the ν grid")
    _flag(p, "--nu-max", type=float, help="Upper end of the ν grid")
    _flag(p, "--nu-points", type=int, help="Points of the ν grid")
    _flag(p, "--photons", type=float, nargs="+", help="Photon numbers N")
    _flag(p, "--pc", type=float, help="Crosstalk strength")
    _flag(p, "--theta", type=float, help="Source axis angle in radians")
    _flag(p, "--dim", type=int, help="Detected modes per axis")
    _flag(p, "--samples", type=int, help="Crosstalk matrices in the ensemble")
    _flag(p, "--x-min", type=float, help="Lower end of the root search window")
    _flag(p, "--x-max", type=float, help="Upper end of the root search window")
    _flag(p, "--average", choices=["fisher", "mrd"], help="Average Fisher information (default) or distances")
    _switch(p, "--ideal", "Use the crosstalk-free w²F = 1 for SPADE")

    p = subparsers["crosstalk-stats"]
    _flag(p, "--mu", type=float, nargs="+", help="Crosstalk magnitudes μ")
    _flag(p, "--dim", type=int, help="Detected modes per axis")
    _flag(p, "--samples", type=int, help="Samples per μ")
    _flag(p, "--dump-samples", help="Directory receiving one per-sample CSV per ensemble")

    p = subparsers["optimal-region"]
    _flag(p, "--pc", type=float, nargs="+", help="Crosstalk strengths")
    _flag(p, "--fraction", type=float, nargs="+", help="Target fractions of the maximal Fisher information")
    _flag(p, "--samples", type=int, help="Samples per strength")
    _flag(p, "--dim", type=int, help="Detected modes per axis")
    _flag(p, "--nu", type=float, help="Relative brightness when not randomised")
    _flag(p, "--theta", type=float, help="Source axis angle in radians")
    _flag(p, "--k-check", type=float, help="k at which the available fraction is reported")
    p.add_argument(
        "--randomize-nu",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="Draw ν uniformly from [1/2, 1] per sample (default: on)",
    )
    _switch(p, "--identity", "Use identity crosstalk")
    _flag(p, "--dump-samples", help="Directory receiving one per-sample CSV per ensemble")

    p = subparsers["threshold-scan"]
    _flag(p, "--nu", type=float, nargs="+", help="Relative brightness values")
    _flag(p, "--pc", type=float, nargs="+", help="Crosstalk strengths")
    _flag(p, "--mu-interval", type=float, nargs=2, metavar=("LO", "HI"), help="Draw μ log-uniformly per sample")
    _flag(p, "--samples", type=int, help="Samples per point")
    _flag(p, "--dim", type=int, help="Detected modes per axis")
    _flag(p, "--theta", type=float, help="Source axis angle in radians")
    _flag(p, "--k-min", type=float, help="Lower end of the search window in units of √p_c")
    _flag(p, "--k-max", type=float, help="Upper end of the search window in units of √p_c")
    _flag(p, "--x-max", type=float, help="Absolute cap on the search window")
    _flag(p, "--dump-samples", help="Directory receiving one per-sample CSV per ensemble")
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(level=logging.WARNING, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger("spade_resolve").setLevel(level)


async def _run(command: str, path: str | None, overrides: dict[str, Any]) -> int:
    try:
        config = await load_run_config(command, path, overrides)
    except ConfigError as e:
        print(f"spade-resolve: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    configure_logging(config.params.log_level)
    try:
        table = await run_command(config)
        await write_table(table, config.out, config.format)
    except (InvalidParameterError, InvalidDimensionError) as e:
        print(f"spade-resolve: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.debug("Command %s failed", command, exc_info=True)
        print(f"spade-resolve: {command} failed: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    return anyio.run(_run, args.command, args.config, overrides)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
