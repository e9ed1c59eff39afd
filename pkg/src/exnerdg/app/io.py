"""CSV snapshots and time series, JSON reports.

Floats are written with 17 significant digits so that a snapshot read back
reproduces the nodal values bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from ..errors import SolverError
from ..timeint import TimeSeries

SNAPSHOT_HEADER = ("x", "h", "hv", "b")
FLOAT_FMT = "%.17g"


class OutputError(SolverError):
    """Writing or reading an output file failed; the message names the path."""


def _open(path: Path, mode: str):
    try:
        if "w" in mode:
            path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, mode, newline="", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"{path}: {exc.strerror or exc}") from None


def write_snapshot(path, x: np.ndarray, u: np.ndarray) -> Path:
    """One row per node, element-major then node-minor."""
    path = Path(path)
    rows = np.column_stack([np.asarray(x).reshape(-1), np.asarray(u).reshape(-1, 3)])
    with _open(path, "w") as fh:
        fh.write(",".join(SNAPSHOT_HEADER) + "\n")
        np.savetxt(fh, rows, fmt=FLOAT_FMT, delimiter=",")
    return path


def read_snapshot(path, shape: tuple[int, int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Returns (x, u); with ``shape = (K, N+1)`` they are reshaped to the DG layout."""
    path = Path(path)
    with _open(path, "r") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != SNAPSHOT_HEADER:
            raise OutputError(f"{path}: unexpected header {header}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    x, u = data[:, 0], data[:, 1:4]
    if shape is not None:
        x, u = x.reshape(shape), u.reshape(shape + (3,))
    return x, u


def write_series(path, series: TimeSeries) -> Path:
    path = Path(path)
    with _open(path, "w") as fh:
        fh.write(",".join(TimeSeries.COLUMNS) + "\n")
        arr = series.as_array()
        if len(arr):
            np.savetxt(fh, arr, fmt=FLOAT_FMT, delimiter=",")
    return path


def read_series(path) -> np.ndarray:
    path = Path(path)
    with _open(path, "r") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != TimeSeries.COLUMNS:
            raise OutputError(f"{path}: unexpected header {header}")
        return np.loadtxt(fh, delimiter=",", ndmin=2).reshape(-1, len(header))


def write_json(path, text_or_obj) -> Path:
    path = Path(path)
    text = text_or_obj if isinstance(text_or_obj, str) else json.dumps(text_or_obj, indent=2)
    with _open(path, "w") as fh:
        fh.write(text + "\n")
    return path


def write_table(path, header: list[str], rows: list[list]) -> Path:
    path = Path(path)
    with _open(path, "w") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path
