"""CSV input/output for datasets, baseline vectors, and attribution output.

Datasets are plain CSV, one row per instance, p numeric columns, with an
optional header row (detected by attempting to parse the first row as
numbers).  Floats are written with 17 significant digits so files
round-trip bit-exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "read_matrix_csv",
    "write_matrix_csv",
    "read_vector_csv",
    "read_attribution_csv",
    "write_attribution_csv",
    "write_rows_csv",
]

_FLOAT_FMT = "%.17g"


def _format(value: float) -> str:
    return _FLOAT_FMT % value


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Read a numeric CSV matrix, skipping a header row if present."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError(f"{path}: empty CSV")
    start = 0
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        start = 1
    if start == len(rows):
        raise ValueError(f"{path}: no data rows")
    data = np.array([[float(cell) for cell in row] for row in rows[start:]])
    return data


def read_vector_csv(path: str | Path, p: int | None = None) -> np.ndarray:
    """Read a single baseline/reference vector from CSV (one row or column)."""
    matrix = read_matrix_csv(path)
    flat = matrix.reshape(-1)
    if matrix.shape[0] != 1 and matrix.shape[1] != 1:
        raise ValueError(f"{path}: expected a single row or column, got shape {matrix.shape}")
    if p is not None and flat.shape[0] != p:
        raise ValueError(f"{path}: expected {p} entries, got {flat.shape[0]}")
    return flat


def write_matrix_csv(path: str | Path, matrix: np.ndarray, header: Sequence[str] | None = None) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(list(header))
        for row in matrix:
            writer.writerow([_format(v) for v in row])


def write_attribution_csv(
    path: str | Path,
    phi: np.ndarray,
    order_used: int | None = None,
    converged: bool | None = None,
) -> None:
    """Write one attribution row per instance: phi_0..phi_{p-1}, order_used, converged."""
    phi = np.atleast_2d(np.asarray(phi, dtype=np.float64))
    p = phi.shape[1]
    header = [f"phi_{j}" for j in range(p)] + ["order_used", "converged"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        order_cell = "" if order_used is None else str(order_used)
        converged_cell = "" if converged is None else str(bool(converged))
        for row in phi:
            writer.writerow([_format(v) for v in row] + [order_cell, converged_cell])


def read_attribution_csv(path: str | Path) -> tuple[np.ndarray, int | None, bool | None]:
    """Read an attribution CSV back into (phi matrix, order_used, converged)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        phi_cols = [name for name in reader.fieldnames if name.startswith("phi_")]
        phi_rows: list[list[float]] = []
        order_used: int | None = None
        converged: bool | None = None
        for row in reader:
            phi_rows.append([float(row[name]) for name in phi_cols])
            if row.get("order_used"):
                order_used = int(row["order_used"])
            if row.get("converged"):
                converged = row["converged"] == "True"
    if not phi_rows:
        raise ValueError(f"{path}: no data rows")
    return np.array(phi_rows), order_used, converged


def write_rows_csv(path: str | Path, rows: Sequence[dict], fieldnames: Sequence[str]) -> None:
    """Write dict rows with a fixed column order, formatting floats stably."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            formatted = {
                key: _format(value) if isinstance(value, float) else value
                for key, value in row.items()
            }
            writer.writerow(formatted)
