"""Scalar transforms applied to a parent's values before they reach the child.

``alpha`` is the slope/width, ``beta`` the center and ``gamma`` the output
scale of the three shaped functions.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .exceptions import InvalidParameter

EDGE_FUNCTION_PARAMS = {
    "identity": (),
    "sigmoid": ("alpha", "beta", "gamma"),
    "gaussian_rbf": ("alpha", "beta", "gamma"),
    "arctan": ("alpha", "beta", "gamma"),
    "power": ("phi",),
}


@dataclass(frozen=True)
class EdgeFunction:
    name: str = "identity"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EDGE_FUNCTION_PARAMS:
            raise InvalidParameter(
                f"unknown edge function {self.name!r}; choose from {sorted(EDGE_FUNCTION_PARAMS)}"
            )
        expected = set(EDGE_FUNCTION_PARAMS[self.name])
        if set(self.params) != expected:
            raise InvalidParameter(
                f"edge function {self.name} takes parameters {sorted(expected)}, got {sorted(self.params)}"
            )
        if self.name == "power" and not self.params["phi"] > 0:
            raise InvalidParameter("power edge function requires phi > 0")

    def __call__(self, z):
        return apply_edge_function(self, z)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))


IDENTITY = EdgeFunction()


def apply_edge_function(kind: EdgeFunction, z):
    z = np.asarray(z, dtype=float)
    p = kind.params
    if kind.name == "identity":
        out = z.copy() if z.ndim else z
    elif kind.name == "sigmoid":
        out = expit(p["alpha"] * (z - p["beta"])) * p["gamma"]
    elif kind.name == "gaussian_rbf":
        out = p["gamma"] * np.exp(-p["alpha"] * (z - p["beta"]) ** 2)
    elif kind.name == "arctan":
        out = p["gamma"] * np.arctan(p["alpha"] * (z - p["beta"]))
    else:  # power
        out = np.sign(z) * np.abs(z) ** p["phi"]
    return float(out) if np.ndim(out) == 0 else out
