"""Linear non-Gaussian acyclic models ``Z = B Z + eps``.

Nodes are fully connected along a random causal order. Each node is
``logexponential(mu = sum_j B_ij g(Z_j), rate = 1)``, so its residual is the
log of an Exp(1) variable. ``g`` is the identity, or ``power(phi)`` for the
mildly nonlinear variant.
"""
from __future__ import annotations

import numpy as np

from .corrections import EdgeCorrection
from .edge_functions import IDENTITY, EdgeFunction
from .exceptions import InvalidRange
from .graph import EdgeSpec, Graph, NodeSpec, validate, zeta_length
from .guideline import IntervalUnion, parse_interval_union

DEFAULT_WEIGHTS = IntervalUnion(((-2.0, -0.5), (0.5, 2.0)))
PHI_RANGE = (0.75, 1.25)


def _as_union(weight_range) -> IntervalUnion:
    if weight_range is None:
        return DEFAULT_WEIGHTS
    if isinstance(weight_range, IntervalUnion):
        return weight_range
    if isinstance(weight_range, str):
        return parse_interval_union(weight_range)
    return IntervalUnion(tuple(weight_range))


def lingam_preset(p: int, weight_range=None, seed=None, phi=1.0, edge_correction: bool = False) -> Graph:
    """Random LiNGAM graph over nodes ``Z1..Zp``.

    Parameters
    ----------
    p : int
        Number of nodes, at least 2.
    weight_range : IntervalUnion, str or sequence of (low, high), optional
        Support of the edge weights; defaults to ``[-2,-0.5] U [0.5,2]``.
    seed : int or Generator, optional
    phi : float or "random"
        Exponent of the power edge function. ``1`` keeps the model linear;
        ``"random"`` draws one value in [0.75, 1.25] for the whole graph.
    edge_correction : bool
        Standardize each transformed parent by burn-in moments. The graph
        then needs :func:`parcs.engine.instantiate` before sampling.
    """
    if int(p) != p or p < 2:
        raise InvalidRange(f"LiNGAM needs at least 2 nodes, got {p}")
    p = int(p)
    weights = _as_union(weight_range)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if isinstance(phi, str):
        if phi != "random":
            raise InvalidRange(f"phi must be a positive number or 'random', got {phi!r}")
        phi = float(rng.uniform(*PHI_RANGE))
    phi = float(phi)
    if not phi > 0:
        raise InvalidRange(f"phi must be positive, got {phi}")
    func = IDENTITY if phi == 1.0 else EdgeFunction("power", {"phi": phi})

    names = [f"Z{i + 1}" for i in range(p)]
    order = [names[i] for i in rng.permutation(p)]
    pos = {n: i for i, n in enumerate(names)}
    nodes, edges = [], []
    for k, child in enumerate(order):
        parents = sorted(order[:k], key=pos.__getitem__)
        d = len(parents)
        mu = [0.0] * zeta_length(d)
        for i in range(d):
            mu[1 + i] = weights.sample(rng)
        rate = [1.0] + [0.0] * (zeta_length(d) - 1)
        nodes.append((child, NodeSpec(child, "logexponential", {"mu": tuple(mu), "rate": tuple(rate)})))
        for par in parents:
            edges.append(EdgeSpec(par, child, func, EdgeCorrection(edge_correction)))
    nodes.sort(key=lambda t: pos[t[0]])
    return validate(Graph([nd for _, nd in nodes], edges))


def adjacency_matrix(graph: Graph) -> np.ndarray:
    """``B`` with ``B[i, j]`` the weight of edge ``Z_j -> Z_i`` (node order)."""
    names = graph.names
    pos = {n: i for i, n in enumerate(names)}
    B = np.zeros((len(names), len(names)))
    for node in graph.nodes:
        parents = graph.parents(node.name)
        row = node.params["mu"]
        for k, par in enumerate(parents):
            B[pos[node.name], pos[par]] = row[1 + k]
    return B


def causal_order(graph: Graph) -> list:
    return list(graph.topo_order)


def _by_node(graph: Graph, table, attr: str) -> np.ndarray:
    """Columns of a batch or frame in node order; arrays are taken as is."""
    if hasattr(table, "columns") and hasattr(table, attr):
        arr, cols = getattr(table, attr), list(table.columns)
        return np.asarray(arr, dtype=float)[:, [cols.index(n) for n in graph.names]]
    if hasattr(table, "columns"):
        return table[graph.names].to_numpy(dtype=float)
    return np.asarray(table, dtype=float)


def residuals(graph: Graph, data) -> np.ndarray:
    """``(I - B) Z`` for linear graphs, one row per sample, node order.

    ``data`` is a :class:`SampleBatch`, a DataFrame or an array in node order.
    """
    Z = _by_node(graph, data, "data")
    B = adjacency_matrix(graph)
    return Z - Z @ B.T


def noise_from_errors(graph: Graph, errors) -> np.ndarray:
    """Residuals implied by uniform errors, ``log(-log(1 - u))``, node order."""
    u = _by_node(graph, errors, "errors")
    return np.log(-np.log1p(-u))
