import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parcs.distributions import DISTRIBUTIONS, icdf_sample, poisson_icdf
from parcs.exceptions import InvalidParameter


def pmf_scan(lam, u):
    """Smallest k with P(X <= k) >= u, by summing the pmf term by term."""
    k, term = 0, math.exp(-lam)
    total = term
    while total < u:
        k += 1
        term *= lam / k
        total += term
    return k


def test_uniform_icdf_is_identity():
    assert icdf_sample("uniform", (0, 1), 0.3) == pytest.approx(0.3)


def test_normal_median_is_mu():
    assert icdf_sample("normal", (1.5, 2.06), 0.5) == pytest.approx(1.5, abs=1e-15)


def test_bernoulli_left_of_threshold_is_zero():
    assert icdf_sample("bernoulli", (0.7,), 0.2) == 0.0
    assert icdf_sample("bernoulli", (0.7,), 0.3) == 0.0
    assert icdf_sample("bernoulli", (0.7,), 0.31) == 1.0


def test_poisson_example():
    assert icdf_sample("poisson", (2.0,), 0.95) == 5


@pytest.mark.parametrize("lam", [0.05, 1.0, 2.0, 7.5, 40.0])
def test_poisson_matches_pmf_scan(lam):
    u = np.random.default_rng(3).random(300)
    got = poisson_icdf(np.full_like(u, lam), u)
    assert [int(v) for v in got] == [pmf_scan(lam, x) for x in u]


def test_deterministic_ignores_error():
    assert icdf_sample("deterministic", (4.25,), 0.01) == 4.25
    assert icdf_sample("deterministic", (4.25,), 0.99) == 4.25


def test_exponential_closed_form():
    assert icdf_sample("exponential", (2.0,), 0.5) == pytest.approx(math.log(2) / 2)


def test_logexponential_residual():
    u = 0.37
    assert icdf_sample("logexponential", (0.0, 1.0), u) == pytest.approx(math.log(-math.log(1 - u)))


@pytest.mark.parametrize(
    "kind,theta",
    [("bernoulli", (1.2,)), ("bernoulli", (0.0,)), ("normal", (0, -1)), ("exponential", (0,)),
     ("poisson", (-1,)), ("uniform", (1, 1)), ("normal", (math.nan, 1))],
)
def test_invalid_parameters(kind, theta):
    with pytest.raises(InvalidParameter):
        icdf_sample(kind, theta, 0.5)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
def test_epsilon_must_be_open_unit(eps):
    with pytest.raises(InvalidParameter):
        icdf_sample("normal", (0, 1), eps)


def test_wrong_parameter_count():
    with pytest.raises(InvalidParameter):
        icdf_sample("normal", (0,), 0.5)


def test_unknown_kind():
    with pytest.raises(InvalidParameter):
        icdf_sample("cauchy", (0, 1), 0.5)


MONOTONE_CASES = {
    "bernoulli": (0.3,),
    "normal": (-1.0, 0.7),
    "uniform": (-2.0, 5.0),
    "exponential": (0.4,),
    "lognormal": (0.1, 0.9),
    "poisson": (3.3,),
    "logexponential": (0.5, 2.0),
    "deterministic": (1.0,),
}


@pytest.mark.parametrize("kind", sorted(MONOTONE_CASES))
@settings(max_examples=60, deadline=None)
@given(a=st.floats(1e-9, 1 - 1e-9), b=st.floats(1e-9, 1 - 1e-9))
def test_icdf_monotone(kind, a, b):
    lo, hi = sorted((a, b))
    theta = MONOTONE_CASES[kind]
    assert icdf_sample(kind, theta, lo) <= icdf_sample(kind, theta, hi)


def test_registry_has_spec_kinds():
    for k in ["bernoulli", "normal", "uniform", "exponential", "lognormal", "poisson", "deterministic"]:
        assert k in DISTRIBUTIONS
