"""CSV interchange: comma separated, LF line endings, header row.

Floats are written with ``repr`` so every value round-trips bit for bit;
NaN is written as an empty field.
"""
from __future__ import annotations

import csv
import math
from typing import Sequence

import numpy as np
import pandas as pd

from .exceptions import ShapeMismatch


def _cell(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(path, columns: Sequence[str], values) -> None:
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[1] != len(columns):
        raise ShapeMismatch(f"{len(columns)} column names for an array of shape {arr.shape}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in arr.tolist():
            w.writerow([_cell(v) for v in row])


def write_frame(path, frame: pd.DataFrame) -> None:
    write_csv(path, [str(c) for c in frame.columns], frame.to_numpy())


def read_csv(path) -> pd.DataFrame:
    """Read a numeric CSV; empty fields become NaN."""
    return pd.read_csv(path, float_precision="round_trip")
