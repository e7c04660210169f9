import numpy as np
import pytest

from parcs.engine import instantiate, sample
from parcs.exceptions import InvalidRange
from parcs.lingam import adjacency_matrix, causal_order, lingam_preset, noise_from_errors, residuals


def test_weights_in_range():
    for seed in range(20):
        g = lingam_preset(5, "[-2,-0.5] U [0.5,2]", seed=seed)
        B = adjacency_matrix(g)
        w = B[B != 0]
        assert len(w) == 10
        assert np.all((np.abs(w) >= 0.5) & (np.abs(w) <= 2))


def test_degenerate_range_two_nodes():
    for seed in range(10):
        g = lingam_preset(2, [(0.75, 0.75)], seed=seed)
        B = adjacency_matrix(g)
        first, second = causal_order(g)
        i, j = int(second[1:]) - 1, int(first[1:]) - 1
        assert B[i, j] == 0.75 and B[j, i] == 0


def test_strictly_lower_triangular_in_causal_order():
    g = lingam_preset(6, seed=3)
    B = adjacency_matrix(g)
    idx = [int(n[1:]) - 1 for n in causal_order(g)]
    P = B[np.ix_(idx, idx)]
    assert np.allclose(np.triu(P), 0)


def test_residual_reconstruction():
    g = instantiate(lingam_preset(5, seed=2))
    batch = sample(g, 1000, seed=9)
    assert np.max(np.abs(residuals(g, batch) - noise_from_errors(g, batch))) < 1e-9


def test_noise_is_log_exponential():
    g = instantiate(lingam_preset(3, seed=0))
    e = noise_from_errors(g, sample(g, 50_000, seed=1))
    # E[log Exp(1)] = -Euler gamma
    assert np.all(np.abs(e.mean(axis=0) + np.euler_gamma) < 0.03)


def test_phi_random_is_one_value_per_graph():
    g = lingam_preset(4, seed=5, phi="random")
    phis = {e.function.params["phi"] for e in g.edges}
    assert len(phis) == 1 and 0.75 <= phis.pop() <= 1.25


def test_phi_one_uses_identity():
    assert all(e.function.name == "identity" for e in lingam_preset(3, seed=0).edges)


@pytest.mark.parametrize("kw", [{"p": 1}, {"p": 3, "phi": 0}, {"p": 3, "phi": "wild"}])
def test_invalid(kw):
    with pytest.raises(InvalidRange):
        lingam_preset(**kw)
