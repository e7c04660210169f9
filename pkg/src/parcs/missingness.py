"""Missing-data graphs (m-graphs).

Each partially observed variable ``Z`` gets a binary indicator ``R_Z``;
``R_Z = 1`` means the value is missing. Which ``Z`` may cause which ``R`` is
set by a 0/1 mask per mechanism, and each indicator's probability is
calibrated to the requested missingness ratio.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from ._seeding import derive_seed, resolve_seed
from .corrections import NodeCorrection
from .description import EdgeEntry, NodeBody, NodeEntry, ParamExpression, PartialGraph
from .engine import instantiate, sample
from .exceptions import InvalidObservedSet, InvalidParameter, InvalidRange, MaskConflict, ShapeMismatch
from .graph import Graph, NodeSpec, validate
from .guideline import FunctionTemplate, Guideline, IntervalUnion
from .randomizer import randomize

MECHANISMS = ("mcar", "mar", "mnar", "sc", "nsc", "mar+mcar")
_ALIASES = {
    "self_censoring": "sc",
    "self-censoring": "sc",
    "no_self_censoring": "nsc",
    "no-self-censoring": "nsc",
    "mnar_general": "mnar",
}
R_PREFIX = "R_"
MGRAPH_BURN_IN = 10_000


@dataclass(frozen=True)
class Mechanism:
    """A missingness mechanism.

    ``observed`` lists the fully observed variables of ``mar`` and
    ``mar+mcar``. ``rr_density`` is the probability of each admissible
    indicator-to-indicator edge.
    """

    tag: str
    observed: tuple = ()
    rr_density: float = 0.0

    def __post_init__(self):
        tag = _ALIASES.get(self.tag.lower(), self.tag.lower())
        if tag not in MECHANISMS:
            raise InvalidParameter(f"unknown mechanism {self.tag!r}; choose from {list(MECHANISMS)}")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "observed", tuple(self.observed))
        if not 0.0 <= self.rr_density <= 1.0:
            raise InvalidRange(f"R->R density {self.rr_density} not in [0, 1]")
        if tag in ("mar", "mar+mcar") and not self.observed:
            raise InvalidObservedSet(f"{tag} needs a non-empty observed set")

    def check(self, z_names: Sequence[str]) -> None:
        if self.tag not in ("mar", "mar+mcar"):
            return
        unknown = [z for z in self.observed if z not in z_names]
        if unknown:
            raise InvalidObservedSet(f"observed set names unknown variables {unknown}")
        if len(set(self.observed)) >= len(z_names):
            raise InvalidObservedSet("observed set must leave at least one variable partially observed")

    def indicated(self, z_names: Sequence[str]) -> list:
        """Variables that receive an indicator."""
        self.check(z_names)
        if self.tag == "mar":
            return [z for z in z_names if z not in self.observed]
        return list(z_names)


@dataclass(frozen=True)
class MechanismMask:
    """``matrix[j, i] = 1`` permits the edge ``z_names[j] -> r_names[i]``."""

    matrix: np.ndarray
    z_names: tuple
    r_names: tuple

    def allows(self, z: str, r: str) -> bool:
        return bool(self.matrix[self.z_names.index(z), self.r_names.index(r)])


def indicator_name(z: str) -> str:
    return R_PREFIX + z


def mechanism_mask(mech: Mechanism, z_names: Sequence[str], r_names: Optional[Sequence[str]] = None) -> MechanismMask:
    """Mask over ``z_names`` x ``r_names``.

    ``r_names`` are the variables carrying an indicator (given as Z names or
    indicator names); by default those implied by the mechanism.
    """
    z_names = list(z_names)
    if r_names is None:
        r_vars = mech.indicated(z_names)
    else:
        mech.check(z_names)
        r_vars = [r[len(R_PREFIX):] if r.startswith(R_PREFIX) and r[len(R_PREFIX):] in z_names else r for r in r_names]
        stray = [r for r in r_vars if r not in z_names]
        if stray:
            raise ShapeMismatch(f"indicators {stray} do not match any variable")
    J, I = len(z_names), len(r_vars)
    M = np.zeros((J, I), dtype=int)
    if mech.tag == "mnar":
        M[:] = 1
    elif mech.tag in ("sc", "nsc"):
        for i, r in enumerate(r_vars):
            j = z_names.index(r)
            if mech.tag == "sc":
                M[j, i] = 1
            else:
                M[:, i] = 1
                M[j, i] = 0
    elif mech.tag in ("mar", "mar+mcar"):
        obs = set(mech.observed)
        for i, r in enumerate(r_vars):
            if r in obs:
                continue
            for j, z in enumerate(z_names):
                if z in obs:
                    M[j, i] = 1
    return MechanismMask(M, tuple(z_names), tuple(indicator_name(r) for r in r_vars))


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _z_part(z_source) -> tuple:
    """(Z nodes, Z edges, data, calibrated Z node names) of a graph or a dataset."""
    if isinstance(z_source, Graph):
        g = validate(z_source)
        keep = g.names if z_source.calibrated else []
        return list(g.nodes), list(g.edges), g.data, keep
    if isinstance(z_source, pd.DataFrame):
        data = {str(c): z_source[c].to_numpy(dtype=float) for c in z_source.columns}
    elif isinstance(z_source, Mapping):
        data = {str(k): np.asarray(v, dtype=float) for k, v in z_source.items()}
    else:
        raise InvalidParameter("z_source must be a Graph, a DataFrame or a mapping of columns")
    if not data:
        raise ShapeMismatch("dataset has no columns")
    lengths = {len(v) for v in data.values()}
    if len(lengths) != 1 or 0 in lengths:
        raise ShapeMismatch("dataset columns must be non-empty and of equal length")
    for k, v in data.items():
        if not _IDENT.match(k):
            raise InvalidParameter(f"column name {k!r} is not a valid node name")
        if not np.all(np.isfinite(v)):
            raise InvalidParameter(f"column {k!r} already has missing or non-finite values")
    nodes = [NodeSpec(k, "empirical") for k in data]
    return nodes, [], data, []


def mgraph_description(z_source, mech: Mechanism, ratio: float) -> tuple:
    """Partial description of the m-graph and the data of empirical Z nodes."""
    if not 0.0 < ratio < 1.0:
        raise InvalidRange(f"missingness ratio must lie in (0, 1), got {ratio}")
    z_nodes, z_edges, data, keep = _z_part(z_source)
    z_names = [n.name for n in z_nodes]
    for z in z_names:
        if indicator_name(z) in z_names:
            raise InvalidParameter(f"variable name {indicator_name(z)!r} clashes with an indicator")
    mask = mechanism_mask(mech, z_names)
    base = PartialGraph.from_graph(Graph(z_nodes, z_edges))
    nodes = list(base.nodes)
    edges = list(base.edges)
    for r in mask.r_names:
        body = NodeBody(
            "bernoulli",
            {"p": ParamExpression(all_holes=True)},
            {"p": NodeCorrection(0.0, 1.0, float(ratio))},
        )
        nodes.append(NodeEntry(r, body))
    for i, r in enumerate(mask.r_names):
        for j, z in enumerate(mask.z_names):
            if mask.matrix[j, i]:
                edges.append(EdgeEntry(z, r, None, None, "optional"))
    if mech.rr_density > 0:
        for a in range(len(mask.r_names)):
            for b in range(a + 1, len(mask.r_names)):
                edges.append(EdgeEntry(mask.r_names[a], mask.r_names[b], None, None, "optional", mech.rr_density))
    return PartialGraph(nodes, edges), mask, data, keep


def build_mgraph(
    z_source,
    mech: Mechanism,
    guideline: Optional[Guideline] = None,
    ratio: float = 0.5,
    seed=None,
    burn_in_n: int = MGRAPH_BURN_IN,
    return_trace: bool = False,
):
    """Randomize Z->R (and R->R) wiring under the mask and calibrate ratios.

    ``z_source`` is a fixed :class:`Graph` or a dataset (DataFrame or mapping of
    columns); dataset columns become data-backed source nodes. The result is a
    calibrated graph; with ``return_trace`` the randomization trace comes too.
    """
    guideline = guideline or Guideline()
    seed = resolve_seed(seed)
    pg, _mask, data, keep = mgraph_description(z_source, mech, ratio)
    graph, trace = randomize(pg, guideline, derive_seed(seed, 0))
    check_mask(graph, _mask)
    graph = replace(graph, data=data)
    graph = instantiate(graph, burn_in_n, derive_seed(seed, 1), keep=keep)
    if return_trace:
        return graph, trace
    return graph


def check_mask(graph: Graph, mask: MechanismMask) -> None:
    """Raise if any Z->R edge of ``graph`` is forbidden by ``mask``."""
    z, r = set(mask.z_names), set(mask.r_names)
    for e in graph.edges:
        if e.source in z and e.target in r and not mask.allows(e.source, e.target):
            raise MaskConflict(f"edge {e.source}->{e.target} is forbidden by the mechanism mask")
        if e.target in z and e.source in r:
            raise MaskConflict(f"edge {e.source}->{e.target} points from an indicator into a variable")


STRONG_COEFS = IntervalUnion(((-5.0, -1.0), (1.0, 5.0)))
NONLINEAR_FUNCTIONS = [FunctionTemplate("sigmoid"), FunctionTemplate("gaussian_rbf"), FunctionTemplate("arctan")]


def experiment_preset(number: int, observed=(), sparsity: float = 0.5, nonlinear: bool = False, mnar: str = "mnar"):
    """(Mechanism, Guideline) of the imputation benchmark scenarios.

    1. MAR with every observed->unobserved edge and strong linear weights.
    2. MAR with Z->R ``sparsity`` (0 gives MCAR, 1 gives scenario 1).
    3. MAR-by-indicators: no Z->R edges, R->R edges with density ``sparsity``.
    4. MAR with Z->R density 0.6; ``nonlinear`` switches on shaped edge
       functions and the quadratic library terms.
    5. MNAR through the mask named by ``mnar`` (``mnar``, ``sc`` or ``nsc``).
    """
    linear = dict(coef_range=STRONG_COEFS, library="linear")
    if number == 1:
        return Mechanism("mar", observed), Guideline(sparsity=1.0, **linear)
    if number == 2:
        return Mechanism("mar", observed), Guideline(sparsity=sparsity, **linear)
    if number == 3:
        return Mechanism("mar", observed, rr_density=sparsity), Guideline(sparsity=0.0, **linear)
    if number == 4:
        if nonlinear:
            return Mechanism("mar", observed), Guideline(
                sparsity=0.6, coef_range=STRONG_COEFS, functions=list(NONLINEAR_FUNCTIONS), library="full"
            )
        return Mechanism("mar", observed), Guideline(sparsity=0.6, **linear)
    if number == 5:
        if mnar not in ("mnar", "sc", "nsc"):
            raise InvalidParameter(f"scenario 5 takes mnar, sc or nsc, got {mnar!r}")
        return Mechanism(mnar), Guideline(sparsity=sparsity, **linear)
    raise InvalidParameter(f"no scenario {number}; choose 1 to 5")


def indicator_pairs(graph: Graph) -> list:
    """``(Z, R)`` name pairs present in an m-graph, in node order."""
    names = set(graph.names)
    return [(n[len(R_PREFIX):], n) for n in graph.names if n.startswith(R_PREFIX) and n[len(R_PREFIX):] in names]


@dataclass
class MaskedDataset:
    values: np.ndarray
    flags: np.ndarray
    columns: list
    achieved_ratio: np.ndarray = field(init=False)

    def __post_init__(self):
        self.flags = np.asarray(self.flags, dtype=np.int8)
        self.achieved_ratio = self.flags.mean(axis=0) if len(self.flags) else np.zeros(self.flags.shape[1])

    def masked(self) -> np.ndarray:
        out = np.array(self.values, dtype=float)
        out[self.flags.astype(bool)] = np.nan
        return out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.masked(), columns=self.columns)

    def mask_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.flags, columns=self.columns)


def apply_missingness(data, r_samples, z_names: Optional[Sequence[str]] = None, r_names: Optional[Sequence[str]] = None) -> MaskedDataset:
    """Flag cell ``(row, Z)`` missing where its indicator is 1.

    With frames (or explicit names) indicators are matched to variables by
    name (``R_Z`` or ``Z``) and variables without one are never flagged; bare
    arrays must have the same shape.
    """
    if isinstance(data, pd.DataFrame):
        z_names = list(data.columns) if z_names is None else list(z_names)
        data = data.to_numpy(dtype=float)
    if isinstance(r_samples, pd.DataFrame):
        r_names = list(r_samples.columns) if r_names is None else list(r_names)
        r_samples = r_samples.to_numpy()
    X = np.asarray(data, dtype=float)
    R = np.asarray(r_samples)
    if X.ndim != 2 or R.ndim != 2:
        raise ShapeMismatch("data and indicators must be 2-D")
    if X.shape[0] != R.shape[0]:
        raise ShapeMismatch(f"data has {X.shape[0]} rows, indicators {R.shape[0]}")
    if not np.all((R == 0) | (R == 1)):
        raise ShapeMismatch("indicators must be 0/1")
    if z_names is None:
        z_names = [f"Z{i + 1}" for i in range(X.shape[1])]
    if len(z_names) != X.shape[1]:
        raise ShapeMismatch(f"{len(z_names)} names for {X.shape[1]} data columns")
    if r_names is None:
        if R.shape != X.shape:
            raise ShapeMismatch(f"indicator matrix {R.shape} does not match data {X.shape}")
        flags = R.astype(np.int8)
    else:
        if len(r_names) != R.shape[1]:
            raise ShapeMismatch(f"{len(r_names)} names for {R.shape[1]} indicator columns")
        flags = np.zeros(X.shape, dtype=np.int8)
        for i, r in enumerate(r_names):
            z = r[len(R_PREFIX):] if r.startswith(R_PREFIX) and r[len(R_PREFIX):] in z_names else r
            if z not in z_names:
                raise ShapeMismatch(f"indicator {r!r} matches no data column")
            flags[:, list(z_names).index(z)] = R[:, i]
    return MaskedDataset(X, flags, list(z_names))


def sample_masked(graph: Graph, n: int, seed=None, exogenous=None) -> MaskedDataset:
    """Sample an m-graph and hide the flagged Z values."""
    batch = sample(graph, n, seed=resolve_seed(seed), exogenous=exogenous)
    frame = batch.to_frame()
    pairs = indicator_pairs(graph)
    r_set = {r for _, r in pairs}
    z_names = [n for n in graph.names if n not in r_set]
    return apply_missingness(frame[z_names], frame[[r for _, r in pairs]])


def write_masked(ds: MaskedDataset, path, meta: Optional[Mapping[str, object]] = None) -> list:
    """Write ``path`` (missing cells empty), ``*.mask.csv`` and ``*.meta``."""
    from .io import write_csv

    path = str(path)
    stem = path[:-4] if path.endswith(".csv") else path
    write_csv(path, ds.columns, ds.masked())
    write_csv(stem + ".mask.csv", ds.columns, ds.flags)
    lines = [f"{c}\t{r!r}" for c, r in zip(ds.columns, ds.achieved_ratio.tolist())]
    with open(stem + ".meta", "w", encoding="utf-8", newline="\n") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"{k}: {v}\n")
        fh.write("achieved_ratio:\n")
        for ln in lines:
            fh.write(f"  {ln}\n")
    return [path, stem + ".mask.csv", stem + ".meta"]
