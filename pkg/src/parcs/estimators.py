"""scikit-learn style wrappers around the functional API."""
from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._seeding import resolve_seed
from ._validation import check_data
from .description import load_description, parse_description
from .engine import DEFAULT_BURN_IN, instantiate, sample
from .exceptions import ParcsError, ShapeMismatch
from .graph import Graph
from .guideline import Guideline, parse_guideline
from .missingness import MGRAPH_BURN_IN, Mechanism, build_mgraph, indicator_pairs


def _as_graph(graph) -> Graph:
    if isinstance(graph, Graph):
        return graph
    if isinstance(graph, str) and "\n" not in graph and graph.endswith(".pdl"):
        return load_description(graph).to_graph()
    if isinstance(graph, str):
        return parse_description(graph).to_graph()
    raise ParcsError("graph must be a Graph, a .pdl path or description text")


class GraphSampler(BaseEstimator):
    """Calibrate a fixed graph on ``fit`` and draw samples from it.

    Parameters
    ----------
    graph : Graph or str
        A fully specified graph, a ``.pdl`` path or description text.
    burn_in_n : int
        Burn-in rows used to freeze correction constants.
    seed : int
        Master seed of the burn-in; ``sample`` takes its own seed.
    """

    def __init__(self, graph=None, burn_in_n: int = DEFAULT_BURN_IN, seed: int = 0):
        self.graph = graph
        self.burn_in_n = burn_in_n
        self.seed = seed

    def fit(self, X=None, y=None):
        self.graph_ = instantiate(_as_graph(self.graph), self.burn_in_n, self.seed)
        self.feature_names_out_ = np.array(self.graph_.names, dtype=object)
        return self

    def sample(self, n: int, seed=None) -> pd.DataFrame:
        check_is_fitted(self, "graph_")
        batch = sample(self.graph_, n, seed=resolve_seed(self.seed if seed is None else seed))
        return batch.to_frame()[self.graph_.names]

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "graph_")
        return self.feature_names_out_


class MissingnessAmputer(TransformerMixin, BaseEstimator):
    """Hide values of a dataset through a randomized m-graph.

    ``fit`` wraps the columns of ``X`` as data-backed nodes, draws the
    indicator wiring and calibrates each indicator to ``ratio``.
    ``transform`` returns ``X`` with missing cells set to NaN.
    """

    def __init__(
        self,
        mechanism: str = "mcar",
        ratio: float = 0.3,
        observed=None,
        rr_density: float = 0.0,
        guideline=None,
        burn_in_n: int = MGRAPH_BURN_IN,
        seed: int = 0,
    ):
        self.mechanism = mechanism
        self.ratio = ratio
        self.observed = observed
        self.rr_density = rr_density
        self.guideline = guideline
        self.burn_in_n = burn_in_n
        self.seed = seed

    def _guideline(self) -> Guideline:
        if self.guideline is None:
            return Guideline()
        if isinstance(self.guideline, Guideline):
            return self.guideline
        return parse_guideline(self.guideline)

    def fit(self, X, y=None):
        arr, names = check_data(X)
        mech = Mechanism(self.mechanism, tuple(self.observed or ()), self.rr_density)
        data = {n: arr[:, i] for i, n in enumerate(names)}
        self.graph_, self.trace_ = build_mgraph(
            data, mech, self._guideline(), self.ratio, self.seed, self.burn_in_n, return_trace=True
        )
        self.n_features_in_ = arr.shape[1]
        self.feature_names_in_ = np.array(names, dtype=object)
        return self

    def missing_mask(self, X, seed=None) -> np.ndarray:
        """0/1 matrix, 1 where the value of ``X`` is withheld."""
        check_is_fitted(self, "graph_")
        arr, _ = check_data(X)
        if arr.shape[1] != self.n_features_in_:
            raise ShapeMismatch(f"X has {arr.shape[1]} features, expected {self.n_features_in_}")
        names = list(self.feature_names_in_)
        exo = {n: arr[:, i] for i, n in enumerate(names)}
        batch = sample(self.graph_, arr.shape[0], seed=resolve_seed(self.seed if seed is None else seed), exogenous=exo)
        flags = np.zeros(arr.shape, dtype=np.int8)
        for z, r in indicator_pairs(self.graph_):
            flags[:, names.index(z)] = batch.column(r)
        return flags

    def transform(self, X, seed=None):
        flags = self.missing_mask(X, seed)
        arr, _ = check_data(X)
        arr[flags.astype(bool)] = np.nan
        if isinstance(X, pd.DataFrame):
            return pd.DataFrame(arr, columns=X.columns, index=X.index)
        return arr
