"""Fully specified causal graphs.

A node's distribution parameters are linear in the input library of its
(edge-transformed) parents::

    zeta(x) = (1, x_1, ..., x_d, x_1*x_1, x_1*x_2, ..., x_d*x_d)
    theta_k = W_k . zeta(x)

Parents are always ordered by node declaration order, which fixes the meaning
of each position in a coefficient row.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np

from .corrections import EdgeCorrection, NodeCorrection, node_correction
from .distributions import get_distribution
from .edge_functions import IDENTITY, EdgeFunction
from .exceptions import (
    CycleDetected,
    DuplicateNode,
    InvalidParameter,
    ParcsError,
    ShapeMismatch,
    UnknownParent,
)

DTYPES = ("continuous", "binary", "count")


class DuplicateEdge(ParcsError):
    pass


def zeta_length(d: int) -> int:
    return 1 + d + d * (d + 1) // 2


def zeta_keys(d: int) -> list[tuple]:
    """Basis labels by position: ``()`` bias, ``(i,)`` linear, ``(i, j)`` product with i <= j."""
    keys: list[tuple] = [()]
    keys += [(i,) for i in range(d)]
    keys += [(i, j) for i in range(d) for j in range(i, d)]
    return keys


def zeta_position(key: tuple, d: int) -> int:
    if len(key) == 0:
        return 0
    if len(key) == 1:
        return 1 + key[0]
    i, j = sorted(key)
    # products (a, b) with a < i come first: sum over a < i of (d - a)
    return 1 + d + i * d - i * (i - 1) // 2 + (j - i)


def zeta(x) -> np.ndarray:
    """Input library of one vector (1-D) or of each row of a matrix (2-D)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    n, d = X.shape
    iu, ju = np.triu_indices(d)
    out = np.empty((n, zeta_length(d)))
    out[:, 0] = 1.0
    out[:, 1 : 1 + d] = X
    out[:, 1 + d :] = X[:, iu] * X[:, ju]
    return out[0] if single else out


def compute_theta(W, zeta_vec, corrections=None):
    """Distribution parameters ``W_k . zeta``, corrected where configured.

    ``W`` is either a mapping from parameter name to row or a sequence of rows;
    ``corrections`` is keyed the same way (name or row index). ``zeta_vec`` may
    be one library vector or a matrix with one library vector per row.
    """
    Z = np.asarray(zeta_vec, dtype=float)
    corrections = corrections or {}
    if isinstance(W, Mapping):
        items = list(W.items())
    else:
        items = list(enumerate(W))
        if not isinstance(corrections, Mapping):
            corrections = dict(enumerate(corrections))
    out = {}
    for key, row in items:
        row = np.asarray(row, dtype=float)
        if row.shape[-1] != Z.shape[-1]:
            raise ShapeMismatch(
                f"coefficient row {key!r} has length {row.shape[-1]}, library has {Z.shape[-1]}"
            )
        theta = Z @ row
        corr = corrections.get(key)
        if corr is not None:
            theta = node_correction(theta, corr)
        out[key] = float(theta) if np.ndim(theta) == 0 else theta
    if isinstance(W, Mapping):
        return out
    return [out[i] for i in range(len(items))]


@dataclass(frozen=True)
class NodeSpec:
    """One node: distribution, one coefficient row per parameter, corrections.

    Rows are tuples of floats laid out over the input library of the node's
    parents in declaration order.
    """

    name: str
    distribution: str
    params: Mapping[str, tuple] = field(default_factory=dict)
    corrections: Mapping[str, NodeCorrection] = field(default_factory=dict)
    dtype: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(
            self, "params", {k: tuple(float(v) for v in row) for k, row in self.params.items()}
        )
        object.__setattr__(self, "corrections", dict(self.corrections))
        if self.dtype is None:
            object.__setattr__(self, "dtype", get_distribution(self.distribution).dtype)

    @property
    def kind(self):
        return get_distribution(self.distribution)


@dataclass(frozen=True)
class EdgeSpec:
    source: str
    target: str
    function: EdgeFunction = IDENTITY
    correction: EdgeCorrection = EdgeCorrection()


@dataclass(frozen=True)
class Graph:
    """A fully specified DAG with its structural equations.

    ``data`` holds the columns of data-backed (``empirical``) source nodes.
    """

    nodes: tuple = ()
    edges: tuple = ()
    topo_order: tuple = ()
    calibrated: bool = field(default=False, compare=False)
    burn_in_n: int = field(default=0, compare=False)
    data: Optional[Mapping[str, np.ndarray]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "topo_order", tuple(self.topo_order))

    @property
    def names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def node(self, name: str) -> NodeSpec:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def edge(self, source: str, target: str) -> EdgeSpec:
        for e in self.edges:
            if e.source == source and e.target == target:
                return e
        raise KeyError((source, target))

    def parents(self, name: str) -> list[str]:
        order = {n: i for i, n in enumerate(self.names)}
        return sorted((e.source for e in self.edges if e.target == name), key=order.__getitem__)

    def children(self, name: str) -> list[str]:
        order = {n: i for i, n in enumerate(self.names)}
        return sorted((e.target for e in self.edges if e.source == name), key=order.__getitem__)

    def descendants(self, name: str) -> set[str]:
        seen, stack = set(), [name]
        while stack:
            for c in self.children(stack.pop()):
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return seen

    @property
    def needs_calibration(self) -> bool:
        if any(e.correction.enabled for e in self.edges):
            return True
        return any(c.target_mean is not None for n in self.nodes for c in n.corrections.values())

    def validate(self) -> "Graph":
        return validate(self)


def _find_cycle(names: Sequence[str], edges) -> list[str]:
    adj: dict[str, list[str]] = {n: [] for n in names}
    for s, t in edges:
        if s in adj and t in adj:
            adj[s].append(t)
    color = dict.fromkeys(names, 0)
    stack: list[str] = []

    def dfs(u):
        color[u] = 1
        stack.append(u)
        for v in adj[u]:
            if color[v] == 1:
                return stack[stack.index(v):]
            if color[v] == 0:
                cyc = dfs(v)
                if cyc:
                    return cyc
        stack.pop()
        color[u] = 2
        return None

    for n in names:
        if color[n] == 0:
            cyc = dfs(n)
            if cyc:
                return cyc
    return list(names)


def topological_order(names: Sequence[str], edges: Sequence[tuple]) -> list[str]:
    """Kahn's algorithm; ties broken by position in ``names``."""
    index = {n: i for i, n in enumerate(names)}
    indeg = dict.fromkeys(names, 0)
    out: dict[str, list[str]] = {n: [] for n in names}
    for s, t in edges:
        if s == t:
            raise CycleDetected([s])
        out[s].append(t)
        indeg[t] += 1
    heap = [index[n] for n in names if indeg[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        u = names[heapq.heappop(heap)]
        order.append(u)
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, index[v])
    if len(order) != len(names):
        remaining = [n for n in names if n not in set(order)]
        raise CycleDetected(_find_cycle(remaining, edges))
    return order


def validate(graph: Graph) -> Graph:
    """Check structure and shapes; return the graph with its topological order set."""
    names = graph.names
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateNode(f"node {n!r} declared twice")
        seen.add(n)
    pairs = set()
    for e in graph.edges:
        for end in (e.source, e.target):
            if end not in seen:
                raise UnknownParent(f"edge {e.source}->{e.target} refers to undeclared node {end!r}")
        if (e.source, e.target) in pairs:
            raise DuplicateEdge(f"edge {e.source}->{e.target} declared twice")
        pairs.add((e.source, e.target))
    order = topological_order(names, [(e.source, e.target) for e in graph.edges])

    for node in graph.nodes:
        dist = get_distribution(node.distribution)
        d = len(graph.parents(node.name))
        if node.dtype not in DTYPES:
            raise InvalidParameter(f"node {node.name}: unknown dtype {node.dtype!r}")
        if dist.data_backed and d:
            raise ShapeMismatch(f"node {node.name}: data-backed nodes cannot have parents")
        missing = [p for p in dist.params if p not in node.params]
        extra = [p for p in node.params if p not in dist.params]
        if missing or extra:
            raise ShapeMismatch(
                f"node {node.name}: {dist.name} needs parameters {list(dist.params)}, "
                f"got {list(node.params)}"
            )
        for p, row in node.params.items():
            if len(row) != zeta_length(d):
                raise ShapeMismatch(
                    f"node {node.name}, parameter {p}: expected row length {zeta_length(d)} "
                    f"for {d} parents, got {len(row)}"
                )
        for p in node.corrections:
            if p not in dist.params:
                raise ShapeMismatch(f"node {node.name}: correction on unknown parameter {p!r}")
        # bias-only rows without a correction are constants and must be valid already
        for p, row in node.params.items():
            if p in node.corrections or any(row[1:]):
                continue
            if not dist.ranges[p].contains(row[0]):
                raise InvalidParameter(
                    f"node {node.name}: constant {dist.name} parameter {p}={row[0]!r} "
                    f"outside {dist.ranges[p]}"
                )
        if dist.name == "uniform" and "low" not in node.corrections and "high" not in node.corrections:
            lo, hi = node.params["low"], node.params["high"]
            if not any(lo[1:]) and not any(hi[1:]) and not lo[0] < hi[0]:
                raise InvalidParameter(f"node {node.name}: uniform requires low < high")

    calibrated = graph.calibrated or not graph.needs_calibration
    return replace(graph, topo_order=tuple(order), calibrated=calibrated)


def restrict_row(row: Sequence[float], old_parents: Sequence[str], new_parents: Sequence[str]) -> tuple:
    """Re-lay a coefficient row onto a different parent list.

    Terms of parents that are dropped vanish; terms of new parents get 0.
    """
    d_old, d_new = len(old_parents), len(new_parents)
    pos = {p: i for i, p in enumerate(new_parents)}
    out = [0.0] * zeta_length(d_new)
    for k, key in enumerate(zeta_keys(d_old)):
        if row[k] == 0:
            continue
        names = [old_parents[i] for i in key]
        if all(n in pos for n in names):
            out[zeta_position(tuple(pos[n] for n in names), d_new)] += row[k]
    return tuple(out)
