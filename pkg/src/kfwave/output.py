"""Deterministic CSV and JSON writers for figure data and reports.

CSV files start with ``#``-prefixed metadata lines (tool versions and the
config digest, never timestamps), then a header row, then data rows with
floats rendered by ``repr`` so files are byte-identical across reruns and
round-trip losslessly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy

from . import __version__

__all__ = ["csv_meta", "write_csv", "write_json", "read_csv"]


def csv_meta(command: str, digest: str) -> list[str]:
    return [
        f"kfwave {__version__} (numpy {np.__version__}, scipy {scipy.__version__})",
        f"command {command}",
        f"config {digest}",
    ]


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, columns: list[tuple[str, list]],
              meta: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [name for name, _ in columns]
    series = [list(vals) for _, vals in columns]
    n = len(series[0]) if series else 0
    if any(len(s) != n for s in series):
        raise ValueError("CSV columns have unequal lengths")
    lines = [f"# {m}" for m in meta]
    lines.append(",".join(names))
    for i in range(n):
        lines.append(",".join(_fmt(s[i]) for s in series))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], dict[str, list[str]], list[str]]:
    """Read back a CSV written by :func:`write_csv` (strings, untyped)."""
    meta: list[str] = []
    rows: list[list[str]] = []
    header: list[str] = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            meta.append(line[1:].strip())
        elif not header:
            header = line.split(",")
        elif line:
            rows.append(line.split(","))
    cols = {name: [r[i] for r in rows] for i, name in enumerate(header)}
    return header, cols, meta


def write_json(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return path


def _word_label(word) -> str:
    return "".join(str(letter) for letter in word)


def write_partition_csv(part, path: str | Path,
                        meta: list[str] | None = None) -> Path:
    """Dump a scale partition as rows (word, lo, hi, mass)."""
    rows = list(zip(part.words, part.word_intervals, part.word_measures))
    return write_csv(
        path,
        [("word", [_word_label(w) for w, _, _ in rows]),
         ("lo", [iv[0] for _, iv, _ in rows]),
         ("hi", [iv[1] for _, iv, _ in rows]),
         ("mass", [m for _, _, m in rows])],
        meta if meta is not None else [f"partition level {part.level}"],
    )


def write_measure_csv(dm, path: str | Path,
                      meta: list[str] | None = None) -> Path:
    """Dump an atomic measure as rows (word, lo, hi, mass).

    Each atom sits at the left endpoint of its word's basic interval; the
    interval is reported so the dump doubles as a cover of the support.
    """
    from .measure import word_interval

    intervals = [word_interval(dm.spec, w) for w in dm.words]
    return write_csv(
        path,
        [("word", [_word_label(w) for w in dm.words]),
         ("lo", [iv[0] for iv in intervals]),
         ("hi", [iv[1] for iv in intervals]),
         ("mass", list(dm.masses))],
        meta if meta is not None else [f"atomic measure level {dm.level}"],
    )
