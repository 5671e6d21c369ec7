# SPDX-FileCopyrightText: Copyright (c) 2024-2025, Spade-Resolve Developers (See LICENSE for list)
# SPDX-License-Identifier: BSD 3-Clause License
"""Result tables and their CSV / JSON renderings."""
from __future__ import annotations

import csv
import io
import json
import math
import pathlib
import sys
from dataclasses import dataclass, field
from typing import Any

import anyio
import numpy as np
import yaml

from ._types import PathType


def package_version() -> str:
    try:
        from ._version import version
    except ImportError:  # pragma: no cover
        return "0.0.0"
    return version


def plain(value: Any) -> Any:
    """Convert numpy scalars and arrays, tuples and nested containers into plain Python values."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return value


@dataclass
class Table:
    """Rows of one command run plus the metadata echoed into the output header."""

    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def append(self, **row: Any) -> None:
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"Row is missing columns: {', '.join(sorted(missing))}")
        self.rows.append({c: plain(row[c]) for c in self.columns})

    def column(self, name: str) -> list[Any]:
        return [row[name] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


def _csv_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ";".join(_csv_cell(v) for v in value)
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, list):
        return [_json_value(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    return value


def render_csv(table: Table) -> str:
    """CSV text whose first lines are the ``# ``-prefixed YAML dump of the metadata."""
    meta = yaml.safe_dump({"meta": plain(table.meta)}, sort_keys=False, default_flow_style=None)
    buffer = io.StringIO()
    for line in meta.splitlines():
        buffer.write(f"# {line}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_csv_cell(row[c]) for c in table.columns])
    return buffer.getvalue()


def render_json(table: Table) -> str:
    """JSON text ``{"meta": {...}, "rows": [...]}``; non-finite numbers become ``null``."""
    document = {"meta": _json_value(plain(table.meta)), "rows": [_json_value(row) for row in table.rows]}
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def render(table: Table, fmt: str = "csv") -> str:
    if fmt == "csv":
        return render_csv(table)
    if fmt == "json":
        return render_json(table)
    raise ValueError(f"Unknown output format {fmt!r}")


async def write_table(table: Table, path: PathType | None = None, fmt: str = "csv") -> None:
    """Write ``table`` to ``path``, or to standard output when ``path`` is None or ``-``."""
    text = render(table, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = pathlib.Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    async with await anyio.open_file(path, "w", encoding="utf-8", newline="") as fh:
        await fh.write(text)


async def read_table(path: PathType) -> Table:
    """Read back a table written by :func:`write_table`; the format is detected from the content."""
    async with await anyio.open_file(pathlib.Path(path).expanduser(), encoding="utf-8") as fh:
        text = await fh.read()
    if text.lstrip().startswith("{"):
        document = json.loads(text)
        rows = document["rows"]
        return Table(columns=list(rows[0]) if rows else [], rows=rows, meta=document["meta"])
    header = [line[2:] for line in text.splitlines() if line.startswith("# ")]
    meta = (yaml.safe_load("\n".join(header)) or {}).get("meta", {})
    reader = csv.DictReader(line for line in text.splitlines() if not line.startswith("#"))
    return Table(columns=list(reader.fieldnames or []), rows=list(reader), meta=meta)
