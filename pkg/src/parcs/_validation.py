"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import re

import numpy as np
from sklearn.utils.validation import check_array

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def feature_names(X, n_features: int) -> list:
    """Column names usable as node names; ``x0, x1, ...`` when absent or unusable."""
    cols = getattr(X, "columns", None)
    if cols is not None:
        names = [str(c) for c in cols]
        if all(_IDENT.match(c) for c in names) and len(set(names)) == len(names):
            return names
    return [f"x{i}" for i in range(n_features)]


def check_data(X, *, allow_nan: bool = False) -> tuple:
    """Validate a 2-D numeric table; return ``(array, names)``."""
    arr = check_array(
        X,
        dtype=np.float64,
        ensure_all_finite="allow-nan" if allow_nan else True,
        ensure_min_samples=1,
        copy=True,
    )
    return arr, feature_names(X, arr.shape[1])
