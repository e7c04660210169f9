"""Node and edge corrections.

A node correction squashes a raw parameter into ``(lower, upper)`` with a
shifted sigmoid; its offset can be calibrated so the corrected parameter hits a
target mean on a burn-in sample. An edge correction standardizes a parent's
transformed values by moments frozen on the burn-in sample.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .exceptions import DegenerateSample, InvalidRange, NonBracketable

OFFSET_BRACKET = (-700.0, 700.0)
OFFSET_XTOL = 1e-12


@dataclass(frozen=True)
class NodeCorrection:
    lower: float = 0.0
    upper: float = 1.0
    target_mean: Optional[float] = None
    offset: float = 0.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise InvalidRange(f"correction needs lower < upper, got ({self.lower}, {self.upper})")
        if self.target_mean is not None and not self.lower < self.target_mean < self.upper:
            raise InvalidRange(
                f"target mean {self.target_mean} outside ({self.lower}, {self.upper})"
            )

    def __call__(self, theta_raw):
        return node_correction(theta_raw, self)


@dataclass(frozen=True)
class EdgeCorrection:
    enabled: bool = False
    mu: float = 0.0
    sigma: float = 1.0

    def __call__(self, z):
        return apply_edge_correction(z, self)


def node_correction(theta_raw, corr: NodeCorrection):
    """``(U - L) / (1 + exp(-theta + O)) + L``, kept strictly inside (L, U)."""
    t = np.asarray(theta_raw, dtype=float)
    lo, hi = corr.lower, corr.upper
    out = (hi - lo) * expit(t - corr.offset) + lo
    out = np.clip(out, np.nextafter(lo, hi), np.nextafter(hi, lo))
    return float(out) if out.ndim == 0 else out


def _corrected_mean(raw, offset, lower, upper):
    return float(np.mean((upper - lower) * expit(raw - offset) + lower))


def calibrate_offset(raw_samples, target_mean: float, lower: float = 0.0, upper: float = 1.0) -> float:
    """Offset that makes the mean corrected value over ``raw_samples`` equal ``target_mean``.

    The corrected mean is strictly decreasing in the offset, so the root is
    unique whenever it lies inside ``OFFSET_BRACKET``.
    """
    raw = np.asarray(raw_samples, dtype=float).ravel()
    if raw.size == 0:
        raise InvalidRange("calibrate_offset needs at least one raw sample")
    if not lower < target_mean < upper:
        raise InvalidRange(f"target mean {target_mean} outside ({lower}, {upper})")
    if not np.all(np.isfinite(raw)):
        raise NonBracketable("raw samples contain non-finite values")

    def f(o):
        return _corrected_mean(raw, o, lower, upper) - target_mean

    a, b = OFFSET_BRACKET
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa < 0 or fb > 0:
        raise NonBracketable(
            f"target mean {target_mean} unreachable for offsets in {OFFSET_BRACKET} "
            f"(reachable means {fb + target_mean:.6g}..{fa + target_mean:.6g})"
        )
    return float(brentq(f, a, b, xtol=OFFSET_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500))


def estimate_moments(samples) -> tuple[float, float]:
    """Sample mean and population (1/n) standard deviation."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise DegenerateSample("moment estimation needs at least two samples")
    if np.all(x == x[0]):
        raise DegenerateSample(f"all {x.size} samples equal {x[0]!r}; cannot standardize")
    mu = float(np.mean(x))
    sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
    if not sigma > 0:
        raise DegenerateSample("zero spread in samples")
    return mu, sigma


def apply_edge_correction(z, corr: EdgeCorrection):
    out = (np.asarray(z, dtype=float) - corr.mu) / corr.sigma
    return float(out) if out.ndim == 0 else out
