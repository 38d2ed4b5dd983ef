"""Shared loading and saving helpers for the figure scripts.

These scripts are a standalone plotting layer over the experiment artifacts
(CSV result tables, JSON summaries, and the cone mesh dump); they never
import the library that produced them.  Images are PNG with fixed backend
settings so that a rerun over the same inputs is byte-identical.
"""

import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({"figure.dpi": 110, "savefig.dpi": 110, "font.size": 9})

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class FigureInputError(RuntimeError):
    pass


def fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def load_table(path) -> tuple:
    """(header, float matrix) from a result CSV; loud on absence/emptiness."""
    path = Path(path)
    if not path.is_file():
        raise FigureInputError(f"{path}: no such input file")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FigureInputError(f"{path}: empty file")
    header, data = rows[0], rows[1:]
    if not data:
        raise FigureInputError(f"{path}: no data rows")
    try:
        mat = [[float(v) for v in row] for row in data]
    except ValueError as exc:
        raise FigureInputError(f"{path}: non-numeric cell ({exc})")
    return header, mat


def column(header, mat, name, path="table"):
    if name not in header:
        raise FigureInputError(f"{path}: missing column {name!r} (have {header})")
    k = header.index(name)
    return [row[k] for row in mat]


def load_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise FigureInputError(f"{path}: no such input file")
    return json.loads(path.read_text())


def save(fig, out_path) -> None:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="png")
    plt.close(fig)
    print(f"wrote {out_path}")
