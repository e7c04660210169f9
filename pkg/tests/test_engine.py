import os

import numpy as np
import pytest

from parcs.corrections import EdgeCorrection, NodeCorrection
from parcs.description import load_description
from parcs.edge_functions import EdgeFunction
from parcs.engine import (
    NotCalibrated,
    ReplaceDistribution,
    SetConstant,
    SeverParents,
    instantiate,
    intervene,
    sample,
    sample_with_errors,
)
from parcs.exceptions import CycleDetected, DegenerateSample, InvalidParameter, ShapeMismatch, UnknownNode
from parcs.graph import EdgeSpec, Graph, NodeSpec


@pytest.fixture
def example1(data_dir):
    return instantiate(load_description(os.path.join(data_dir, "example1.pdl")).to_graph())


def bern_graph(target=None, edge_corr=False):
    return Graph(
        [
            NodeSpec("Z1", "normal", {"mu": (10.0,), "sigma": (1.0,)}),
            NodeSpec("Z2", "bernoulli", {"p": (0.0, 2.0, 0.0)}, {"p": NodeCorrection(0, 1, target)}),
        ],
        [EdgeSpec("Z1", "Z2", correction=EdgeCorrection(edge_corr))],
    )


def test_no_corrections_is_noop(example1):
    g = example1
    again = instantiate(g, seed=99)
    assert again == g


def test_sampling_deterministic(example1):
    a, b = sample(example1, 500, seed=4), sample(example1, 500, seed=4)
    np.testing.assert_array_equal(a.data, b.data)
    assert not np.array_equal(a.data, sample(example1, 500, seed=5).data)


def test_example1_pinned_parents(example1):
    g = intervene(example1, {"Z1": SetConstant(0.2), "Z2": SetConstant(0.3)})
    z3 = sample(g, 10_000, seed=1).column("Z3")
    assert abs(z3.mean() - 1.5) < 0.07
    assert abs(z3.std() - 2.06) < 0.05


def test_errors_reuse_reproduces(example1):
    b = sample(example1, 300, seed=2)
    np.testing.assert_array_equal(sample_with_errors(example1, b).data, b.data)
    np.testing.assert_array_equal(sample_with_errors(example1, b.errors).data, b.data)


def test_errors_shape(example1):
    with pytest.raises(ShapeMismatch):
        sample_with_errors(example1, np.full((4, 2), 0.5))


def test_median_errors_normal_chain():
    g = instantiate(Graph(
        [NodeSpec("A", "normal", {"mu": (1.0,), "sigma": (3.0,)}),
         NodeSpec("B", "normal", {"mu": (0.5, 2.0, 0.0), "sigma": (1.0, 0.0, 0.0)})],
        [EdgeSpec("A", "B")],
    ))
    out = sample_with_errors(g, np.full((3, 2), 0.5))
    np.testing.assert_allclose(out.column("A"), 1.0)
    np.testing.assert_allclose(out.column("B"), 2.5)


def test_counterfactual_pair(example1):
    b = sample(example1, 200, seed=8)
    cf = sample_with_errors(intervene(example1, {"Z1": 0.0}), b)
    np.testing.assert_array_equal(cf.column("Z2"), b.column("Z2"))
    assert np.all(cf.column("Z1") == 0)
    assert not np.array_equal(cf.column("Z3"), b.column("Z3"))


def test_do_z3_keeps_upstream(example1):
    b = sample(example1, 200, seed=8)
    cf = sample_with_errors(intervene(example1, {"Z3": 0.0}), b)
    np.testing.assert_array_equal(cf.data[:, :2], b.data[:, :2])


def test_all_constant(example1):
    g = intervene(example1, {"Z1": 1.0, "Z2": 2.0, "Z3": 3.0})
    d = sample(g, 50).to_frame()
    assert (d["Z1"] == 1).all() and (d["Z2"] == 2).all() and (d["Z3"] == 3).all()


def test_sever_and_replace(example1):
    g = intervene(example1, {"Z3": SeverParents(["Z2"])})
    assert g.parents("Z3") == ["Z1"]
    assert g.node("Z3").params["mu"] == (1.0, 1.0, 0.0)
    r = intervene(example1, {"Z3": ReplaceDistribution("uniform", {"low": (0.0,), "high": (1.0,)}, parents=[])})
    assert r.parents("Z3") == []
    z = sample(r, 1000).column("Z3")
    assert z.min() >= 0 and z.max() <= 1


def test_intervention_errors(example1):
    with pytest.raises(UnknownNode):
        intervene(example1, {"Q": 1.0})
    with pytest.raises(UnknownNode):
        intervene(example1, {"Z1": SeverParents(["Z3"])})
    rewire = ReplaceDistribution("normal", {"mu": (0.0, 1.0, 0.0), "sigma": (1.0, 0.0, 0.0)}, parents=["Z3"])
    with pytest.raises(CycleDetected):
        intervene(example1, {"Z1": rewire})


def test_needs_instantiate():
    with pytest.raises(NotCalibrated):
        sample(bern_graph(0.5), 10)


def test_target_mean_offset_near_20():
    g = instantiate(bern_graph(0.5), burn_in_n=10_000, seed=0)
    off = g.node("Z2").corrections["p"].offset
    assert abs(off - 20) < 0.1
    assert abs(sample(g, 20_000, seed=1).column("Z2").mean() - 0.5) < 0.02


def test_edge_correction_moments():
    g = instantiate(bern_graph(edge_corr=True), burn_in_n=10_000)
    c = g.edge("Z1", "Z2").correction
    assert abs(c.mu - 10) < 0.05 and abs(c.sigma - 1) < 0.05


def test_calibration_idempotent():
    g = instantiate(bern_graph(0.3, edge_corr=True), seed=7)
    assert instantiate(g, seed=7) == g


def test_keep_preserves_constants():
    g = instantiate(bern_graph(0.3, edge_corr=True), seed=7)
    h = instantiate(g, seed=8, keep=["Z2"])
    assert h == g
    assert instantiate(g, seed=8) != g


def test_degenerate_edge_correction():
    g = Graph(
        [NodeSpec("A", "deterministic", {"value": (1.0,)}),
         NodeSpec("B", "normal", {"mu": (0.0, 1.0, 0.0), "sigma": (1.0, 0.0, 0.0)})],
        [EdgeSpec("A", "B", correction=EdgeCorrection(True))],
    )
    with pytest.raises(DegenerateSample):
        instantiate(g)


def test_uncorrected_parameter_leaves_range():
    g = instantiate(Graph(
        [NodeSpec("A", "normal", {"mu": (0.0,), "sigma": (1.0,)}),
         NodeSpec("B", "bernoulli", {"p": (0.5, 1.0, 0.0)})],
        [EdgeSpec("A", "B")],
    ))
    with pytest.raises(InvalidParameter):
        sample(g, 1000)


def test_dummy_node_workaround():
    # a deterministic node computing Z1 + Z2, passed to Z3 through arctan
    g = instantiate(Graph(
        [NodeSpec("Z1", "normal", {"mu": (0.0,), "sigma": (1.0,)}),
         NodeSpec("Z2", "normal", {"mu": (0.0,), "sigma": (1.0,)}),
         NodeSpec("D", "deterministic", {"value": (0, 1, 1, 0, 0, 0)}),
         NodeSpec("Z3", "normal", {"mu": (0.0, 1.0, 0.0), "sigma": (0.1, 0.0, 0.0)})],
        [EdgeSpec("Z1", "D"), EdgeSpec("Z2", "D"),
         EdgeSpec("D", "Z3", EdgeFunction("arctan", {"alpha": 1, "beta": 0, "gamma": 1}))],
    ))
    b = sample(g, 200, seed=3)
    np.testing.assert_allclose(b.column("D"), b.column("Z1") + b.column("Z2"), atol=1e-14)
    u = b.errors[:, b.columns.index("Z3")]
    from scipy.stats import norm
    np.testing.assert_allclose(b.column("Z3"), np.arctan(b.column("D")) + 0.1 * norm.ppf(u), atol=1e-12)


def test_adding_node_leaves_other_columns(example1):
    bigger = Graph(
        list(example1.nodes) + [NodeSpec("W", "normal", {"mu": (0.0,), "sigma": (1.0,)})],
        example1.edges,
    )
    a = sample(example1, 100, seed=3)
    b = sample(instantiate(bigger), 100, seed=3)
    for c in ("Z1", "Z2", "Z3"):
        np.testing.assert_array_equal(a.column(c), b.column(c))
