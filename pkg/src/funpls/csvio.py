"""Plain-text layouts for curves, grids, responses and predictions.

* curves: ``n`` rows of ``m`` comma-separated values, no header;
* grid: header ``point,weight`` then one ``point,weight`` pair per line;
* responses / predictions: one value per line.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import FunplsError
from .funcore import Grid, trapezoid_grid

__all__ = ["CsvParseError", "read_curves", "read_grid", "read_responses", "default_grid", "format_column"]


class CsvParseError(FunplsError, ValueError):
    def __init__(self, path, line: int, column: int, message: str):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path, self.line, self.column = str(path), line, column


def _parse(value: str, path, line: int, column: int) -> float:
    try:
        return float(value.strip())
    except ValueError:
        raise CsvParseError(path, line, column, f"cannot parse {value!r} as a number") from None


def _rows(path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            yield lineno, row


def read_curves(path) -> np.ndarray:
    """``(n, m)`` array of curve samples."""
    rows, width = [], None
    for lineno, row in _rows(path):
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise CsvParseError(path, lineno, min(len(row), width) + 1, f"expected {width} values, got {len(row)}")
        rows.append([_parse(v, path, lineno, col) for col, v in enumerate(row, start=1)])
    if not rows:
        raise CsvParseError(path, 1, 1, "no curves found")
    return np.array(rows)


def read_responses(path) -> np.ndarray:
    values = []
    for lineno, row in _rows(path):
        if len(row) != 1:
            raise CsvParseError(path, lineno, 2, "expected one value per line")
        values.append(_parse(row[0], path, lineno, 1))
    if not values:
        raise CsvParseError(path, 1, 1, "no responses found")
    return np.array(values)


def read_grid(path) -> Grid:
    """Grid from ``point,weight`` lines; the interval is ``[first point, last point]``."""
    rows = list(_rows(path))
    if not rows or [c.strip() for c in rows[0][1]] != ["point", "weight"]:
        raise CsvParseError(path, rows[0][0] if rows else 1, 1, "expected header 'point,weight'")
    points, weights = [], []
    for lineno, row in rows[1:]:
        if len(row) != 2:
            raise CsvParseError(path, lineno, min(len(row), 2) + 1, "expected two columns")
        points.append(_parse(row[0], path, lineno, 1))
        weights.append(_parse(row[1], path, lineno, 2))
    try:
        return Grid(np.array(points), np.array(weights), (points[0], points[-1]) if points else (0, 0))
    except (ValueError, IndexError) as exc:
        raise CsvParseError(path, 2, 1, f"invalid grid: {exc}") from None


def default_grid(m: int) -> Grid:
    """Integer abscissae ``1..m`` with trapezoid weights."""
    return trapezoid_grid(np.arange(1, m + 1, dtype=float))


def format_column(values) -> str:
    """One value per line, 17 significant digits."""
    return "".join(f"{float(v):.17g}\n" for v in values)


def write_table(path: Path, X: np.ndarray) -> None:
    with open(path, "w") as fh:
        for row in np.atleast_2d(X):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_grid(path: Path, grid: Grid) -> None:
    with open(path, "w") as fh:
        fh.write("point,weight\n")
        for t, w in zip(grid.points, grid.weights):
            fh.write(f"{t:.17g},{w:.17g}\n")
