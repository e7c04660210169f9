import numpy as np
import pandas as pd
import pytest
from sklearn.base import clone

from parcs.estimators import GraphSampler, MissingnessAmputer
from parcs.exceptions import ShapeMismatch

PDL = "node A : normal(mu=0, sigma=1)\nnode B : bernoulli(p=2*A), correction(0, 1), target_mean=0.3\nedge A->B : identity\n"


def test_sampler_params_and_clone():
    s = GraphSampler(PDL, burn_in_n=500, seed=3)
    assert s.get_params() == {"graph": PDL, "burn_in_n": 500, "seed": 3}
    c = clone(s)
    assert c.get_params() == s.get_params() and c is not s


def test_sampler_fit_sample():
    s = GraphSampler(PDL, seed=1).fit()
    df = s.sample(4000, seed=2)
    assert list(df.columns) == ["A", "B"]
    assert list(s.get_feature_names_out()) == ["A", "B"]
    assert abs(df["B"].mean() - 0.3) < 0.03
    pd.testing.assert_frame_equal(df, s.sample(4000, seed=2))


def test_amputer_transform():
    rng = np.random.default_rng(0)
    X = pd.DataFrame({"x": rng.normal(size=5000), "y": rng.normal(size=5000), "w": rng.normal(size=5000)})
    amp = MissingnessAmputer("mar", ratio=0.25, observed=["x"], seed=4)
    out = amp.fit_transform(X)
    assert isinstance(out, pd.DataFrame) and list(out.columns) == ["x", "y", "w"]
    assert out["x"].notna().all()
    assert abs(out["y"].isna().mean() - 0.25) < 0.03
    kept = out.notna().to_numpy()
    np.testing.assert_array_equal(out.to_numpy()[kept], X.to_numpy()[kept])


def test_amputer_arrays_and_clone():
    X = np.random.default_rng(1).normal(size=(1000, 3))
    amp = MissingnessAmputer("mcar", ratio=0.5, seed=2, burn_in_n=2000)
    c = clone(amp)
    assert c.get_params()["ratio"] == 0.5
    before = X.copy()
    out = amp.fit(X).transform(X)
    assert isinstance(out, np.ndarray) and np.isnan(out).any()
    np.testing.assert_array_equal(X, before)
    with pytest.raises(ShapeMismatch):
        amp.transform(X[:, :2])
