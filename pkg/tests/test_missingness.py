import numpy as np
import pandas as pd
import pytest

from parcs.exceptions import InvalidObservedSet, MaskConflict, ShapeMismatch
from parcs.graph import EdgeSpec, Graph, NodeSpec
from parcs.guideline import Guideline
from parcs.missingness import (
    Mechanism,
    apply_missingness,
    build_mgraph,
    check_mask,
    experiment_preset,
    indicator_pairs,
    mechanism_mask,
    sample_masked,
    write_masked,
)

Z = ["Z1", "Z2", "Z3"]


def z_graph():
    return Graph(
        [NodeSpec("Z1", "normal", {"mu": (0.0,), "sigma": (1.0,)}),
         NodeSpec("Z2", "normal", {"mu": (0.0, 0.8, 0.0), "sigma": (1.0, 0.0, 0.0)}),
         NodeSpec("Z3", "uniform", {"low": (-1.0,), "high": (1.0,)})],
        [EdgeSpec("Z1", "Z2")],
    )


def test_mcar_mask_zero():
    np.testing.assert_array_equal(mechanism_mask(Mechanism("mcar"), Z).matrix, np.zeros((3, 3)))


def test_self_censoring_identity():
    np.testing.assert_array_equal(mechanism_mask(Mechanism("sc"), Z).matrix, np.eye(3))


def test_no_self_censoring():
    np.testing.assert_array_equal(mechanism_mask(Mechanism("nsc"), Z).matrix, np.ones((3, 3)) - np.eye(3))


def test_mnar_all_ones():
    np.testing.assert_array_equal(mechanism_mask(Mechanism("mnar"), Z).matrix, np.ones((3, 3)))


def test_mar_mask():
    m = mechanism_mask(Mechanism("mar", observed=("Z1",)), Z)
    assert m.r_names == ("R_Z2", "R_Z3")
    np.testing.assert_array_equal(m.matrix, [[1, 1], [0, 0], [0, 0]])


def test_mar_plus_mcar():
    m = mechanism_mask(Mechanism("mar+mcar", observed=("Z1",)), Z)
    assert m.r_names == ("R_Z1", "R_Z2", "R_Z3")
    np.testing.assert_array_equal(m.matrix, [[0, 1, 1], [0, 0, 0], [0, 0, 0]])


def test_aliases():
    assert Mechanism("self_censoring").tag == "sc"
    assert Mechanism("MCAR").tag == "mcar"


@pytest.mark.parametrize("obs", [(), ("Z1", "Z2", "Z3"), ("Q",)])
def test_invalid_observed_set(obs):
    with pytest.raises(InvalidObservedSet):
        mechanism_mask(Mechanism("mar", observed=obs) if obs else Mechanism("mar", observed=obs), Z)


def test_apply_trivial_cases():
    X = np.arange(6.0).reshape(3, 2)
    assert apply_missingness(X, np.zeros((3, 2))).flags.sum() == 0
    full = apply_missingness(X, np.ones((3, 2)))
    assert np.isnan(full.masked()).all()
    np.testing.assert_array_equal(full.achieved_ratio, [1, 1])


def test_checkerboard():
    ds = apply_missingness(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[1, 0], [0, 1]]))
    assert ds.flags.sum() == 2
    np.testing.assert_array_equal(ds.achieved_ratio, [0.5, 0.5])
    m = ds.masked()
    assert np.isnan(m[0, 0]) and np.isnan(m[1, 1]) and m[0, 1] == 2 and m[1, 0] == 3


def test_apply_by_name():
    X = pd.DataFrame({"a": [1.0, 2.0], "b": [3.0, 4.0]})
    ds = apply_missingness(X, pd.DataFrame({"R_b": [1, 0]}))
    np.testing.assert_array_equal(ds.flags, [[0, 1], [0, 0]])


def test_apply_shapes():
    with pytest.raises(ShapeMismatch):
        apply_missingness(np.zeros((3, 2)), np.zeros((2, 2)))
    with pytest.raises(ShapeMismatch):
        apply_missingness(np.zeros((3, 2)), np.full((3, 2), 2))


def test_mcar_has_no_z_parents_and_is_independent():
    g = build_mgraph(z_graph(), Mechanism("mcar"), Guideline(sparsity=1.0), ratio=0.3, seed=1)
    assert all(not e.target.startswith("R_") for e in g.edges)
    from parcs.engine import sample

    n = 10_000
    d = sample(g, n, seed=2).to_frame()
    band = 2.5758 / np.sqrt(n)
    for r in ("R_Z1", "R_Z2", "R_Z3"):
        for z in Z:
            assert abs(np.corrcoef(d[r], d[z])[0, 1]) < band


def test_self_censoring_structure():
    for seed in range(10):
        g = build_mgraph(z_graph(), Mechanism("sc"), Guideline(sparsity=1.0), ratio=0.4, seed=seed, burn_in_n=2000)
        for z, r in indicator_pairs(g):
            assert g.parents(r) == [z]


@pytest.mark.parametrize("mech", [Mechanism("mar", observed=("Z1",)), Mechanism("nsc"), Mechanism("mnar")])
def test_ratio_calibration(mech):
    g = build_mgraph(z_graph(), mech, Guideline(sparsity=0.7), ratio=0.5, seed=3)
    ds = sample_masked(g, 10_000, seed=4)
    for col, r in zip(ds.columns, ds.achieved_ratio):
        if col in mech.observed:
            assert r == 0
        else:
            assert abs(r - 0.5) < 0.02


def test_dataset_source():
    rng = np.random.default_rng(0)
    data = pd.DataFrame({"a": rng.normal(size=500), "b": rng.exponential(size=500)})
    g = build_mgraph(data, Mechanism("sc"), Guideline(sparsity=1.0), ratio=0.2, seed=5)
    assert g.node("a").distribution == "empirical"
    assert g.parents("a") == [] and g.parents("b") == []
    ds = sample_masked(g, 500, seed=1, exogenous={"a": data["a"].to_numpy(), "b": data["b"].to_numpy()})
    np.testing.assert_array_equal(ds.values[:, 0], data["a"].to_numpy())


def test_rr_edges_follow_declaration_order():
    g = build_mgraph(z_graph(), Mechanism("mcar", rr_density=1.0), ratio=0.3, seed=0, burn_in_n=2000)
    rr = [(e.source, e.target) for e in g.edges if e.source.startswith("R_")]
    assert rr == [("R_Z1", "R_Z2"), ("R_Z1", "R_Z3"), ("R_Z2", "R_Z3")]


def test_check_mask_rejects_forbidden_edge():
    mask = mechanism_mask(Mechanism("sc"), Z)
    g = Graph(
        [NodeSpec("Z1", "normal", {"mu": (0.0,), "sigma": (1.0,)}),
         NodeSpec("R_Z2", "bernoulli", {"p": (0.0, 0.0, 0.0)})],
        [EdgeSpec("Z1", "R_Z2")],
    )
    with pytest.raises(MaskConflict):
        check_mask(g, mask)


def test_experiment_presets():
    m, g = experiment_preset(1, observed=("Z1",))
    assert m.tag == "mar" and g.sparsity == (1.0, 1.0) and g.library == "linear"
    m, g = experiment_preset(3, observed=("Z1",), sparsity=0.4)
    assert m.rr_density == 0.4 and g.sparsity == (0.0, 0.0)
    m, g = experiment_preset(4, observed=("Z1",), nonlinear=True)
    assert g.sparsity == (0.6, 0.6) and {f.name for f in g.functions} == {"sigmoid", "gaussian_rbf", "arctan"}
    m, _ = experiment_preset(5, mnar="sc")
    assert m.tag == "sc"


def test_write_masked(tmp_path):
    ds = apply_missingness(np.array([[1.5, 2.0], [3.0, 4.25]]), np.array([[1, 0], [0, 0]]))
    paths = write_masked(ds, tmp_path / "out.csv", {"seed": 7})
    assert open(paths[0]).read() == "Z1,Z2\n,2.0\n3.0,4.25\n"
    assert open(paths[1]).read() == "Z1,Z2\n1,0\n0,0\n"
    meta = open(paths[2]).read()
    assert "seed: 7" in meta and "Z1\t0.5" in meta
