"""Output distributions, sampled through their inverse CDFs.

Each node draws a uniform error ``u`` in (0, 1) and maps it through
``F^{-1}(u; theta)`` of its distribution, where ``theta`` is computed from the
node's parents. Discrete kinds use a cumulative pmf scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln, ndtri, pdtr

from .exceptions import InvalidParameter

POISSON_MAX_TERMS = 10**6

INF = math.inf


@dataclass(frozen=True)
class ParamRange:
    """Valid range of one distribution parameter."""

    low: float = -INF
    high: float = INF
    low_inclusive: bool = False
    high_inclusive: bool = False

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        ok = np.isfinite(x)
        if self.low_inclusive:
            ok &= x >= self.low
        else:
            ok &= x > self.low
        if self.high_inclusive:
            ok &= x <= self.high
        else:
            ok &= x < self.high
        return ok

    @property
    def bounded(self) -> bool:
        """True when at least one side is finite."""
        return math.isfinite(self.low) or math.isfinite(self.high)

    @property
    def doubly_bounded(self) -> bool:
        return math.isfinite(self.low) and math.isfinite(self.high)

    def __str__(self):
        lb = "[" if self.low_inclusive else "("
        rb = "]" if self.high_inclusive else ")"
        return f"{lb}{self.low}, {self.high}{rb}"


REAL = ParamRange()
POSITIVE = ParamRange(low=0.0)
NON_NEGATIVE = ParamRange(low=0.0, low_inclusive=True)
UNIT_OPEN = ParamRange(low=0.0, high=1.0)


@dataclass(frozen=True)
class DistributionKind:
    """A parametric output distribution.

    Parameters
    ----------
    name : str
        Tag used in graph descriptions.
    params : tuple of str
        Parameter names in the order they are stored.
    ranges : mapping
        Valid range per parameter.
    dtype : str
        Default data type of a node with this distribution.
    """

    name: str
    params: tuple
    ranges: Mapping[str, ParamRange]
    dtype: str
    _icdf: Callable = field(repr=False, compare=False)
    data_backed: bool = False

    def check(self, theta: Mapping[str, np.ndarray], where: str = "") -> None:
        for p in self.params:
            ok = self.ranges[p].contains(theta[p])
            if not np.all(ok):
                bad = np.asarray(theta[p], dtype=float)[~ok] if np.ndim(ok) else theta[p]
                first = float(np.ravel(bad)[0])
                raise InvalidParameter(
                    f"{where}{self.name} parameter {p}={first!r} outside {self.ranges[p]}"
                )
        if self.name == "uniform":
            low, high = np.asarray(theta["low"]), np.asarray(theta["high"])
            if not np.all(low < high):
                raise InvalidParameter(f"{where}uniform requires low < high")

    def icdf(self, theta: Mapping[str, np.ndarray], u: np.ndarray, check: bool = True) -> np.ndarray:
        if check:
            self.check(theta)
        return self._icdf(theta, np.asarray(u, dtype=float))


def _bernoulli(theta, u):
    return (u > 1.0 - theta["p"]).astype(float)


def _normal(theta, u):
    return theta["mu"] + theta["sigma"] * ndtri(u)


def _uniform(theta, u):
    return theta["low"] + u * (theta["high"] - theta["low"])


def _exponential(theta, u):
    return -np.log1p(-u) / theta["rate"]


def _lognormal(theta, u):
    return np.exp(theta["mu"] + theta["sigma"] * ndtri(u))


def _logexponential(theta, u):
    return theta["mu"] + np.log(-np.log1p(-u) / theta["rate"])


def _deterministic(theta, u):
    return np.broadcast_to(np.asarray(theta["value"], dtype=float), np.shape(u)).copy()


def _empirical(theta, u):
    raise InvalidParameter("empirical nodes take their values from data, not from an iCDF")


def poisson_icdf(lam, u) -> np.ndarray:
    """Smallest k with P(X <= k) >= u, found by scanning the pmf upward."""
    lam, u = np.broadcast_arrays(np.asarray(lam, dtype=float), np.asarray(u, dtype=float))
    shape = lam.shape
    lam = lam.ravel()
    u = u.ravel()
    out = np.zeros(lam.shape)
    if lam.size == 0:
        return out.reshape(shape)
    # skip the far-left tail for large rates; pdtr supplies the exact cdf there
    k0 = np.where(lam > 50, np.floor(lam - 10.0 * np.sqrt(lam)), 0.0)
    k = k0.copy()
    cdf = np.where(k0 > 0, pdtr(k0 - 1, lam), 0.0)
    log_lam = np.log(lam)
    todo = np.arange(lam.size)
    for _ in range(POISSON_MAX_TERMS):
        kk, ll = k[todo], lam[todo]
        pmf = np.exp(-ll + kk * log_lam[todo] - gammaln(kk + 1.0))
        cdf[todo] += pmf
        done = cdf[todo] >= u[todo]
        # cdf can stall just below 1 from rounding; stop once the tail is exhausted
        done |= (kk > ll) & (pmf < 1e-300)
        out[todo[done]] = kk[done]
        todo = todo[~done]
        if todo.size == 0:
            break
        k[todo] += 1.0
    else:
        out[todo] = k[todo]
    return out.reshape(shape)


def _poisson(theta, u):
    return poisson_icdf(theta["lambda"], u)


DISTRIBUTIONS: dict[str, DistributionKind] = {
    d.name: d
    for d in [
        DistributionKind("bernoulli", ("p",), {"p": UNIT_OPEN}, "binary", _bernoulli),
        DistributionKind("normal", ("mu", "sigma"), {"mu": REAL, "sigma": NON_NEGATIVE}, "continuous", _normal),
        DistributionKind("uniform", ("low", "high"), {"low": REAL, "high": REAL}, "continuous", _uniform),
        DistributionKind("exponential", ("rate",), {"rate": POSITIVE}, "continuous", _exponential),
        DistributionKind("lognormal", ("mu", "sigma"), {"mu": REAL, "sigma": NON_NEGATIVE}, "continuous", _lognormal),
        DistributionKind("poisson", ("lambda",), {"lambda": POSITIVE}, "count", _poisson),
        DistributionKind("logexponential", ("mu", "rate"), {"mu": REAL, "rate": POSITIVE}, "continuous", _logexponential),
        DistributionKind("deterministic", ("value",), {"value": REAL}, "continuous", _deterministic),
        DistributionKind("empirical", (), {}, "continuous", _empirical, data_backed=True),
    ]
}


def get_distribution(kind) -> DistributionKind:
    if isinstance(kind, DistributionKind):
        return kind
    try:
        return DISTRIBUTIONS[kind]
    except KeyError:
        raise InvalidParameter(
            f"unknown distribution {kind!r}; choose from {sorted(DISTRIBUTIONS)}"
        ) from None


def icdf_sample(kind, theta: Sequence[float] | Mapping[str, float], epsilon):
    """Map uniform error(s) ``epsilon`` through the iCDF of ``kind`` at ``theta``.

    ``theta`` may be a mapping by parameter name or a sequence in the order of
    ``kind.params``. Scalar inputs give a scalar float.
    """
    dist = get_distribution(kind)
    if not isinstance(theta, Mapping):
        theta = list(theta)
        if len(theta) != len(dist.params):
            raise InvalidParameter(
                f"{dist.name} takes {len(dist.params)} parameters, got {len(theta)}"
            )
        theta = dict(zip(dist.params, theta))
    eps = np.asarray(epsilon, dtype=float)
    if np.any((eps <= 0) | (eps >= 1)):
        raise InvalidParameter("epsilon must lie strictly inside (0, 1)")
    th = {k: np.asarray(v, dtype=float) for k, v in theta.items()}
    out = dist.icdf(th, eps)
    if np.ndim(out) == 0:
        return float(out)
    return out
