"""Partial randomization: resolve a partial description into a fixed graph.

Free elements are resolved in a fixed order: node existence, edge existence,
edge functions, distributions, then coefficients. Every draw goes through a
chooser that records it under a stable key, so a trace can rebuild the same
graph without the guideline or the random stream.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .corrections import EdgeCorrection, NodeCorrection
from .description import HOLE, NodeBody, PartialGraph, is_hole, serialize
from .distributions import get_distribution
from .edge_functions import EDGE_FUNCTION_PARAMS, EdgeFunction
from .exceptions import CycleDetected, MaskConflict, TraceMismatch
from .graph import EdgeSpec, Graph, NodeSpec, topological_order, validate, zeta_keys, zeta_length
from .guideline import DEFAULT_FUNCTION_RANGES, Guideline


def fingerprint(pg: PartialGraph) -> str:
    return hashlib.sha256(serialize(pg).encode("utf-8")).hexdigest()


@dataclass
class RandomizationTrace:
    """Seed, description fingerprint and every resolved choice, by key."""

    seed: Optional[int]
    fingerprint: str
    choices: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {"seed": self.seed, "fingerprint": self.fingerprint, "choices": self.choices},
            indent=1,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "RandomizationTrace":
        try:
            obj = json.loads(text)
            return cls(obj["seed"], obj["fingerprint"], dict(obj["choices"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise TraceMismatch(f"unreadable trace: {exc}") from None


class _Recorder:
    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.choices: dict = {}

    def __call__(self, key: str, draw: Callable):
        value = draw(self.rng)
        self.choices[key] = value
        return value


class _Replayer:
    def __init__(self, choices: dict):
        self.choices = choices

    def __call__(self, key: str, draw: Callable):
        try:
            return self.choices[key]
        except KeyError:
            raise TraceMismatch(f"trace has no recorded choice for {key!r}") from None


def _uniform(rng, lo, hi) -> float:
    return float(lo + (hi - lo) * rng.random()) if hi > lo else float(lo)


def _bernoulli(p):
    return lambda rng: bool(rng.random() < p)


def admissible_order(pg: PartialGraph) -> list:
    """Global order that optional edges must follow.

    When all declared edges together are acyclic, any subset is too and this is
    their topological order, so every declared edge stays admissible.
    Otherwise it is declaration order with non-optional edges pulling their
    sources ahead; a cycle among those raises ``CycleDetected``.
    """
    try:
        return topological_order(pg.names, [(e.source, e.target) for e in pg.edges])
    except CycleDetected:
        mandatory = [(e.source, e.target) for e in pg.edges if e.presence != "optional"]
        return topological_order(pg.names, mandatory)


def _policy_corrections(dist, params: list, g: Guideline) -> dict:
    """Correction triples ``[L, U, target]`` the policy gives these parameters."""
    out = {}
    if g.correction_policy == "never":
        return out
    for p in params:
        rng_ = dist.ranges[p]
        if g.correction_policy == "bounded-params-only" and not rng_.bounded:
            continue
        lo = rng_.low if math.isfinite(rng_.low) else g.correction_range[0]
        hi = rng_.high if math.isfinite(rng_.high) else g.correction_range[1]
        if not lo < hi:
            continue
        out[p] = [lo, hi, None]
    return out


def _resolve(pg: PartialGraph, g: Optional[Guideline], choose) -> Graph:
    names = pg.names
    index = {n: i for i, n in enumerate(names)}

    # 1. node existence
    present = set()
    for n in pg.nodes:
        if n.optional:
            p = n.p if n.p is not None else g.node_existence
            if choose(f"node:{n.name}", _bernoulli(p)):
                present.add(n.name)
        else:
            present.add(n.name)

    # 2. edge existence
    rank = {n: i for i, n in enumerate(admissible_order(pg))}
    has_optional = any(e.presence == "optional" and e.p is None for e in pg.edges)
    sparsity = None
    if has_optional:
        sparsity = choose("sparsity", lambda rng: _uniform(rng, *g.sparsity))
    kept = []
    for e in pg.edges:
        if e.source not in present or e.target not in present:
            continue
        label = f"{e.source}->{e.target}"
        if e.presence != "optional":
            if g is not None and not g.allows(e.source, e.target):
                raise MaskConflict(f"edge {label} is declared {e.presence} but the connection mask forbids it")
            kept.append(e)
            continue
        if rank[e.source] > rank[e.target]:
            continue
        p = e.p if e.p is not None else sparsity
        allowed = g is None or g.allows(e.source, e.target)
        # masked pairs are recorded too so replay needs no guideline
        if choose(f"edge:{label}", _bernoulli(p) if allowed else (lambda rng: False)):
            kept.append(e)

    # 3. edge functions
    edges = []
    for e in kept:
        label = f"{e.source}->{e.target}"
        if e.function is None:
            def draw_fn(rng):
                t = g.functions[int(rng.integers(len(g.functions)))]
                return {"name": t.name, "params": {k: _uniform(rng, *t.param_range(k)) for k in EDGE_FUNCTION_PARAMS[t.name]}}

            fn = choose(f"edgefn:{label}", draw_fn)
            corr = e.correction
            if corr is None:
                on = choose(f"edgecorr:{label}", lambda rng: g.edge_correction)
                corr = EdgeCorrection(bool(on))
            func = EdgeFunction(fn["name"], dict(fn["params"]))
        else:
            params = dict(e.function.params)
            holes = [k for k, v in params.items() if is_hole(v)]
            if holes:
                def draw_holes(rng, name=e.function.name, holes=holes):
                    tmpl = next((t for t in g.functions if t.name == name), None)
                    out = {}
                    for k in holes:
                        lo, hi = tmpl.param_range(k) if tmpl else DEFAULT_FUNCTION_RANGES[k]
                        out[k] = _uniform(rng, lo, hi)
                    return out

                params.update(choose(f"edgefn:{label}", draw_holes))
            func = EdgeFunction(e.function.name, params)
            corr = e.correction or EdgeCorrection()
        edges.append(EdgeSpec(e.source, e.target, func, corr))

    # 4. distributions of random nodes
    bodies = {}
    for n in pg.nodes:
        if n.name not in present:
            continue
        if n.body is not None:
            bodies[n.name] = n.body
            continue

        def draw_dist(rng):
            t = g.distributions[int(rng.integers(len(g.distributions)))]
            return {"name": t.name, "pinned": dict(t.pinned)}

        bodies[n.name] = choose(f"dist:{n.name}", draw_dist)

    # 5. coefficients (and the corrections the policy attaches to free parameters)
    nodes = []
    for n in pg.nodes:
        if n.name not in present:
            continue
        parents = sorted({e.source for e in edges if e.target == n.name}, key=index.__getitem__)
        d = len(parents)
        body = bodies[n.name]
        if isinstance(body, NodeBody):
            dist = get_distribution(body.distribution)
            templ = {p: body.params[p].to_row(parents) for p in dist.params}
            corrections = dict(body.corrections)
            dtype = body.dtype
        else:
            dist = get_distribution(body["name"])
            templ = {}
            for p in dist.params:
                if p in body["pinned"]:
                    templ[p] = (float(body["pinned"][p]),) + (0.0,) * (zeta_length(d) - 1)
                else:
                    templ[p] = (HOLE,) * zeta_length(d)
            corrections = {}
            dtype = None
        rows = {}
        free = []
        for p in dist.params:
            row = templ[p]
            hole_pos = [i for i, c in enumerate(row) if is_hole(c)]
            if not hole_pos:
                rows[p] = row
                continue
            if p not in corrections:
                free.append(p)

            def draw_row(rng, row=row, hole_pos=hole_pos):
                out = [0.0 if is_hole(c) else float(c) for c in row]
                keys = zeta_keys(d)
                for i in hole_pos:
                    if g.library == "linear" and len(keys[i]) == 2:
                        continue
                    out[i] = g.coef_range.sample(rng)
                return out

            rows[p] = tuple(choose(f"coef:{n.name}:{p}", draw_row))
        if free:
            def draw_corr(rng, free=tuple(free)):
                out = _policy_corrections(dist, list(free), g)
                if g.target_mean is not None:
                    for p, trip in out.items():
                        if dist.ranges[p].doubly_bounded:
                            lo, hi = max(g.target_mean[0], trip[0]), min(g.target_mean[1], trip[1])
                            t = _uniform(rng, lo, hi)
                            if trip[0] < t < trip[1]:
                                trip[2] = t
                return out

            for p, (lo, hi, tm) in choose(f"corr:{n.name}", draw_corr).items():
                corrections[p] = NodeCorrection(lo, hi, tm)
        nodes.append(NodeSpec(n.name, dist.name, rows, corrections, dtype))
    return validate(Graph(nodes, edges))


def randomize(pg: PartialGraph, g: Guideline, seed=None) -> tuple:
    """Draw one fully specified graph from ``pg`` under guideline ``g``.

    Returns ``(graph, trace)``. The graph is validated but not calibrated.
    """
    if isinstance(seed, np.random.Generator):
        rng, seed_value = seed, None
    else:
        seed_value = None if seed is None else int(seed)
        rng = np.random.default_rng(seed_value)
    rec = _Recorder(rng)
    graph = _resolve(pg, g, rec)
    return graph, RandomizationTrace(seed_value, fingerprint(pg), rec.choices)


def replay(pg: PartialGraph, trace: RandomizationTrace) -> Graph:
    """Rebuild the graph recorded in ``trace``; no guideline or RNG is needed."""
    if trace.fingerprint != fingerprint(pg):
        raise TraceMismatch("trace was recorded for a different description")
    return _resolve(pg, None, _Replayer(trace.choices))
