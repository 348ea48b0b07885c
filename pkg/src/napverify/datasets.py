"""Labeled dataset CSV format: header ``label,x0,...,x{d-1}``, features in [0,1]."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np


class DatasetFormatError(ValueError):
    """Raised when a dataset CSV does not match the documented layout."""


def load_dataset(
    source: Union[str, Path, IO],
    expect_dim: Optional[int] = None,
    check_range: bool = True,
) -> list[tuple[int, np.ndarray]]:
    """Read (label, feature vector) rows; rejects out-of-range features by default."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return load_dataset(fh, expect_dim, check_range)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("dataset file is empty") from None
    if not header or header[0] != "label":
        raise DatasetFormatError("first column must be 'label'")
    dim = len(header) - 1
    expected_cols = [f"x{i}" for i in range(dim)]
    if header[1:] != expected_cols:
        raise DatasetFormatError(f"feature columns must be x0..x{dim - 1} in order")
    if expect_dim is not None and dim != expect_dim:
        raise DatasetFormatError(f"dataset has {dim} features, expected {expect_dim}")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != dim + 1:
            raise DatasetFormatError(f"line {lineno}: expected {dim + 1} columns, got {len(row)}")
        try:
            label = int(row[0])
            x = np.array([float(v) for v in row[1:]], dtype=np.float64)
        except ValueError as e:
            raise DatasetFormatError(f"line {lineno}: {e}") from None
        if check_range and (np.any(x < 0.0) or np.any(x > 1.0)):
            raise DatasetFormatError(f"line {lineno}: feature outside [0, 1]")
        rows.append((label, x))
    return rows


def save_dataset(rows: Iterable[tuple[int, Sequence[float]]], dest: Union[str, Path, IO]) -> None:
    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            save_dataset(rows, fh)
            return
    rows = list(rows)
    if not rows:
        raise ValueError("refusing to write an empty dataset")
    dim = len(rows[0][1])
    writer = csv.writer(dest)
    writer.writerow(["label"] + [f"x{i}" for i in range(dim)])
    for label, x in rows:
        writer.writerow([int(label)] + [repr(float(v)) for v in x])
