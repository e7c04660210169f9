"""Calibration and sampling of fully specified graphs.

Every node owns a uniform error stream derived from the master seed and its
name, so adding, removing or intervening on a node never shifts the errors of
any other node. Sampling walks the topological order: parent values go through
their edge functions and edge corrections, into the input library, through the
coefficient rows and node corrections, and finally through the iCDF.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ._seeding import (
    STREAM_BURN_IN,
    STREAM_ROWS,
    STREAM_SAMPLE,
    node_stream,
    open_uniforms,
    resolve_seed,
)
from .corrections import EdgeCorrection, NodeCorrection, calibrate_offset, estimate_moments, node_correction
from .edge_functions import IDENTITY
from .exceptions import DegenerateSample, InvalidParameter, ParcsError, ShapeMismatch, UnknownNode
from .graph import Graph, NodeSpec, EdgeSpec, restrict_row, topological_order, validate, zeta

DEFAULT_BURN_IN = 1000


class NotCalibrated(ParcsError):
    pass


@dataclass
class SampleBatch:
    """Realizations and the uniform errors that produced them.

    Columns of both matrices follow ``columns`` (the graph's topological order).
    ``rows`` holds the resampled row indices of data-backed nodes, if any.
    """

    data: np.ndarray
    errors: np.ndarray
    columns: list
    seed: Optional[int] = None
    rows: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self):
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.data, columns=list(self.columns))

    def errors_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.errors, columns=list(self.columns))


def _parent_inputs(graph: Graph, name: str, cols: Mapping[str, np.ndarray], n: int):
    parents = graph.parents(name)
    X = np.empty((n, len(parents)))
    for k, p in enumerate(parents):
        e = graph.edge(p, name)
        t = np.asarray(e.function(cols[p]), dtype=float)
        if e.correction.enabled:
            t = (t - e.correction.mu) / e.correction.sigma
        X[:, k] = t
    return X


def _raw_theta(node: NodeSpec, Z: np.ndarray) -> dict:
    return {p: Z @ np.asarray(row) for p, row in node.params.items()}


def _finish(node: NodeSpec, raw: dict, u: np.ndarray) -> np.ndarray:
    theta = dict(raw)
    for p, corr in node.corrections.items():
        theta[p] = node_correction(theta[p], corr)
    dist = node.kind
    dist.check(theta, where=f"node {node.name}: ")
    return dist.icdf(theta, u, check=False)


def _data_column(graph: Graph, name: str, rows, exogenous) -> np.ndarray:
    if exogenous is not None and name in exogenous:
        return np.asarray(exogenous[name], dtype=float)
    if graph.data is None or name not in graph.data:
        raise InvalidParameter(f"node {name} is data-backed but no data was supplied")
    return np.asarray(graph.data[name], dtype=float)[rows]


def _draw_rows(graph: Graph, seed: int, n: int, tag: int) -> Optional[np.ndarray]:
    if not graph.data:
        return None
    m = len(next(iter(graph.data.values())))
    rng = node_stream(seed, "\x00rows", tag * 16 + STREAM_ROWS)
    return rng.integers(0, m, size=n)


def instantiate(graph: Graph, burn_in_n: int = DEFAULT_BURN_IN, seed=0, keep: Sequence[str] = ()) -> Graph:
    """Freeze edge moments and node offsets from a burn-in sample.

    Nodes are calibrated in topological order, each one on burn-in values of
    its already-calibrated ancestors. Nodes named in ``keep`` retain their
    current constants (and those of their incoming edges). A graph without
    corrections comes back validated and otherwise unchanged.
    """
    keep = set(keep)
    graph = validate(graph)
    if not graph.needs_calibration:
        return replace(graph, calibrated=True, burn_in_n=int(burn_in_n))
    if burn_in_n < 2:
        raise DegenerateSample("burn-in needs at least two rows")
    seed = resolve_seed(seed)
    n = int(burn_in_n)
    rows = _draw_rows(graph, seed, n, STREAM_BURN_IN)
    edges = {(e.source, e.target): e for e in graph.edges}
    nodes = {nd.name: nd for nd in graph.nodes}
    cols: dict[str, np.ndarray] = {}
    for name in graph.topo_order:
        node = nodes[name]
        u = open_uniforms(node_stream(seed, name, STREAM_BURN_IN), n)
        if node.kind.data_backed:
            cols[name] = _data_column(graph, name, rows, None)
            continue
        parents = graph.parents(name)
        X = np.empty((n, len(parents)))
        for k, p in enumerate(parents):
            e = edges[(p, name)]
            t = np.asarray(e.function(cols[p]), dtype=float)
            if e.correction.enabled and name in keep:
                t = (t - e.correction.mu) / e.correction.sigma
            elif e.correction.enabled:
                try:
                    mu, sigma = estimate_moments(t)
                except DegenerateSample as exc:
                    raise DegenerateSample(f"edge {p}->{name}: {exc}") from None
                e = replace(e, correction=EdgeCorrection(True, mu, sigma))
                edges[(p, name)] = e
                t = (t - mu) / sigma
            X[:, k] = t
        raw = _raw_theta(node, zeta(X))
        corrs = {}
        for p, corr in node.corrections.items():
            if corr.target_mean is not None and name not in keep:
                off = calibrate_offset(raw[p], corr.target_mean, corr.lower, corr.upper)
                corr = replace(corr, offset=off)
            corrs[p] = corr
        node = replace(node, corrections=corrs)
        nodes[name] = node
        cols[name] = _finish(node, raw, u)
    return replace(
        graph,
        nodes=tuple(nodes[nd.name] for nd in graph.nodes),
        edges=tuple(edges[(e.source, e.target)] for e in graph.edges),
        calibrated=True,
        burn_in_n=n,
    )


def _require_calibrated(graph: Graph) -> Graph:
    if not graph.topo_order or len(graph.topo_order) != len(graph.nodes):
        graph = validate(graph)
    if not graph.calibrated and graph.needs_calibration:
        raise NotCalibrated("graph has corrections to calibrate; call instantiate() first")
    return graph


def sample(graph: Graph, n: int, seed=0, exogenous: Optional[Mapping[str, np.ndarray]] = None) -> SampleBatch:
    """Draw ``n`` rows; identical (graph, n, seed) give bit-identical batches."""
    graph = _require_calibrated(graph)
    seed = resolve_seed(seed)
    n = int(n)
    errors = np.empty((n, len(graph.topo_order)))
    for k, name in enumerate(graph.topo_order):
        errors[:, k] = open_uniforms(node_stream(seed, name, STREAM_SAMPLE), n)
    rows = _draw_rows(graph, seed, n, STREAM_SAMPLE)
    batch = sample_with_errors(graph, errors, exogenous=exogenous, rows=rows)
    batch.seed = seed
    return batch


def sample_with_errors(
    graph: Graph,
    errors,
    columns: Optional[Sequence[str]] = None,
    exogenous: Optional[Mapping[str, np.ndarray]] = None,
    rows: Optional[np.ndarray] = None,
) -> SampleBatch:
    """Run the sampling pipeline on a given error matrix.

    ``errors`` may be a :class:`SampleBatch` (its errors, columns and data rows
    are reused), a DataFrame, or an array whose columns are ``columns``
    (default: the graph's topological order).
    """
    graph = _require_calibrated(graph)
    if isinstance(errors, SampleBatch):
        columns = errors.columns if columns is None else columns
        rows = errors.rows if rows is None else rows
        errors = errors.errors
    elif isinstance(errors, pd.DataFrame):
        columns = list(errors.columns) if columns is None else columns
        errors = errors.to_numpy(dtype=float)
    E = np.asarray(errors, dtype=float)
    order = list(graph.topo_order)
    if E.ndim != 2:
        raise ShapeMismatch(f"error matrix must be 2-D, got shape {E.shape}")
    columns = order if columns is None else list(columns)
    if E.shape[1] != len(columns):
        raise ShapeMismatch(f"error matrix has {E.shape[1]} columns for {len(columns)} names")
    missing = [c for c in order if c not in columns]
    if missing:
        raise ShapeMismatch(f"error matrix lacks columns for nodes {missing}")
    E = E[:, [columns.index(c) for c in order]]
    if np.any((E <= 0) | (E >= 1)):
        raise ShapeMismatch("errors must lie strictly inside (0, 1)")
    n = E.shape[0]
    if graph.data and rows is None and not (exogenous and all(k in exogenous for k in graph.data)):
        raise InvalidParameter("data-backed nodes need row indices or exogenous values")
    if exogenous is not None:
        for k, v in exogenous.items():
            if len(v) != n:
                raise ShapeMismatch(f"exogenous column {k} has {len(v)} rows, expected {n}")

    nodes = {nd.name: nd for nd in graph.nodes}
    cols: dict[str, np.ndarray] = {}
    out = np.empty_like(E)
    for k, name in enumerate(order):
        node = nodes[name]
        if node.kind.data_backed:
            vals = _data_column(graph, name, rows, exogenous)
        else:
            Z = zeta(_parent_inputs(graph, name, cols, n))
            vals = _finish(node, _raw_theta(node, Z), E[:, k])
        cols[name] = vals
        out[:, k] = vals
    return SampleBatch(data=out, errors=E, columns=order, rows=rows)


@dataclass(frozen=True)
class SetConstant:
    value: float


@dataclass(frozen=True)
class ReplaceDistribution:
    """New distribution for a node.

    ``params`` rows are laid out over ``parents`` when given, otherwise over
    the node's current parents.
    """

    distribution: str
    params: Mapping[str, Sequence[float]]
    corrections: Mapping[str, NodeCorrection] = field(default_factory=dict)
    parents: Optional[Sequence[str]] = None


@dataclass(frozen=True)
class SeverParents:
    parents: Sequence[str]


def intervene(graph: Graph, iv: Mapping[str, object]) -> Graph:
    """Replace the conditionals of the intervened nodes.

    Frozen calibration constants of every other node are inherited, so the
    distributions upstream of the intervention do not move.
    """
    graph = _require_calibrated(graph)
    nodes = {nd.name: nd for nd in graph.nodes}
    edges = list(graph.edges)
    for name, action in iv.items():
        if name not in nodes:
            raise UnknownNode(f"cannot intervene on unknown node {name!r}")
        node = nodes[name]
        current = [e.source for e in edges if e.target == name]
        order = {n: i for i, n in enumerate(graph.names)}
        current.sort(key=order.__getitem__)
        if isinstance(action, (int, float, np.number)):
            action = SetConstant(float(action))
        if isinstance(action, SetConstant):
            edges = [e for e in edges if e.target != name]
            nodes[name] = NodeSpec(name, "deterministic", {"value": (float(action.value),)}, {}, node.dtype)
        elif isinstance(action, SeverParents):
            drop = set(action.parents)
            unknown = drop - set(current)
            if unknown:
                raise UnknownNode(f"{sorted(unknown)} are not parents of {name}")
            keep = [p for p in current if p not in drop]
            edges = [e for e in edges if not (e.target == name and e.source in drop)]
            params = {p: restrict_row(row, current, keep) for p, row in node.params.items()}
            nodes[name] = replace(node, params=params)
        elif isinstance(action, ReplaceDistribution):
            new_parents = current if action.parents is None else list(action.parents)
            for p in new_parents:
                if p not in nodes:
                    raise UnknownNode(f"unknown parent {p!r} for {name}")
            new_parents.sort(key=order.__getitem__)
            if action.parents is not None:
                kept = {e.source: e for e in edges if e.target == name}
                edges = [e for e in edges if e.target != name]
                edges += [kept.get(p, EdgeSpec(p, name, IDENTITY)) for p in new_parents]
            nodes[name] = NodeSpec(name, action.distribution, dict(action.params), dict(action.corrections))
        else:
            raise TypeError(f"unsupported intervention {action!r}")

    new = replace(graph, nodes=tuple(nodes[nd.name] for nd in graph.nodes), edges=tuple(edges))
    pairs = [(e.source, e.target) for e in edges]
    index = {n: i for i, n in enumerate(graph.topo_order)}
    if all(index[s] < index[t] for s, t in pairs):
        checked = validate(new)
        return replace(checked, topo_order=graph.topo_order, calibrated=True, burn_in_n=graph.burn_in_n)
    topological_order(new.names, pairs)  # raises CycleDetected
    return replace(validate(new), calibrated=True, burn_in_n=graph.burn_in_n)
