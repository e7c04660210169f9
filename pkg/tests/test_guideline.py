import numpy as np
import pytest

from parcs.exceptions import EmptyChoiceList, InvalidRange, PDLSyntaxError
from parcs.guideline import Guideline, IntervalUnion, parse_guideline, parse_interval_union


def test_two_interval_union():
    g = parse_guideline("nodes:\n  coef_range: [-5,-1] U [1,5]\n")
    assert g.coef_range.intervals == ((-5.0, -1.0), (1.0, 5.0))
    rng = np.random.default_rng(0)
    draws = np.array([g.coef_range.sample(rng) for _ in range(20_000)])
    assert np.all(np.abs(draws) >= 1) and np.all(np.abs(draws) <= 5)
    # equal lengths, so each side gets about half
    assert abs(np.mean(draws > 0) - 0.5) < 0.02


def test_union_weighted_by_length():
    u = IntervalUnion(((0.0, 1.0), (10.0, 13.0)))
    rng = np.random.default_rng(1)
    draws = np.array([u.sample(rng) for _ in range(40_000)])
    assert abs(np.mean(draws >= 10) - 0.75) < 0.01
    assert all(u.contains(x) for x in draws[:200])


def test_point_sparsity():
    assert parse_guideline("edges:\n  sparsity: 0.5\n").sparsity == (0.5, 0.5)
    assert parse_guideline("sparsity: [0.2, 0.4]").sparsity == (0.2, 0.4)


def test_point_union():
    assert parse_interval_union("3").sample(np.random.default_rng(0)) == 3.0


def test_empty_lists():
    with pytest.raises(EmptyChoiceList):
        parse_guideline("nodes:\n  distributions:\n")
    with pytest.raises(EmptyChoiceList):
        Guideline(distributions=[])
    with pytest.raises(EmptyChoiceList):
        parse_guideline("edges:\n  functions: ")


@pytest.mark.parametrize(
    "text",
    ["coef_range: [2, 1]", "sparsity: [0.2, 1.5]", "existence: 2", "range: [1, 1]"],
)
def test_invalid_ranges(text):
    with pytest.raises(InvalidRange):
        parse_guideline(text)


@pytest.mark.parametrize(
    "text",
    ["nodes:\n  sparsity: 0.5", "foo: 1", "just words", "distributions: cauchy",
     "functions: sigmoid(delta=[0,1])", "mask: A->B=0"],
)
def test_syntax_errors(text):
    with pytest.raises(PDLSyntaxError):
        parse_guideline(text)


def test_full_document():
    g = parse_guideline(
        """
        nodes:
          distributions: normal, bernoulli, uniform(low=0, high=1)
          coef_range: [-2, 2]
          existence: 0.25
          library: linear
        edges:
          functions: identity, sigmoid(alpha=[1, 3]), power(phi=[0.5, 1.5])
          sparsity: [0.1, 0.9]
          correction: on
          groups: Z=Z*, R=R_*
          mask: R->Z=0
        corrections:
          policy: always
          range: [-4, 4]
          target_mean: [0.2, 0.8]
        """
    )
    assert [d.name for d in g.distributions] == ["normal", "bernoulli", "uniform"]
    assert g.distributions[2].pinned == {"low": 0.0, "high": 1.0}
    assert g.node_existence == 0.25 and g.library == "linear" and g.edge_correction
    assert g.functions[1].param_range("alpha") == (1.0, 3.0)
    assert g.functions[1].param_range("beta") == (-1.0, 1.0)
    assert not g.allows("R_a", "Za") and g.allows("Za", "R_a") and g.allows("Za", "Zb")
    assert g.correction_policy == "always" and g.correction_range == (-4.0, 4.0)
    assert g.target_mean == (0.2, 0.8)
