"""Graph description language (``.pdl``): parsing and canonical serialization.

One declaration per line, ``#`` starts a comment::

    node Z1 : normal(mu=0, sigma=1)
    node Z2 : normal(mu=? + ?*Z1, sigma=?), dtype=continuous
    node Z3 : bernoulli(p=Z1 + Z1*Z2), correction(0, 1), target_mean=0.3
    node Z4 : random
    node Z5 : optional(p=0.5) { normal(mu=?, sigma=1) }
    edge Z1->Z2 : identity
    edge Z1->Z3 : sigmoid(alpha=1.5, beta=0, gamma=1), correction
    edge Z4->Z3 : optional(p=0.3)
    edge Z5->Z3 : required_if_exists { random }

Parameter expressions are polynomials of degree at most two in the node's
parents. ``?`` marks a coefficient left to randomization; a lone ``?`` frees
every coefficient of the row. Omitted terms have coefficient zero.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .corrections import EdgeCorrection, NodeCorrection
from .distributions import DISTRIBUTIONS, get_distribution
from .edge_functions import EDGE_FUNCTION_PARAMS, EdgeFunction
from .exceptions import (
    DuplicateNode,
    NonQuadraticTerm,
    ParcsError,
    PDLSyntaxError,
    UnknownParent,
    UnknownParentInExpression,
)
from .graph import EdgeSpec, Graph, NodeSpec, zeta_keys, zeta_length, zeta_position


class _Hole:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "?"

    def __reduce__(self):
        return (_Hole, ())


HOLE = _Hole()
Coef = Union[float, _Hole]


def is_hole(x) -> bool:
    return x is HOLE


# --------------------------------------------------------------------------- types


@dataclass
class ParamExpression:
    """Coefficients keyed by basis element.

    Keys are ``()`` for the bias, ``(a,)`` for a linear term and ``(a, b)`` for
    a product, with names ordered by the node's parent order.
    """

    terms: dict = field(default_factory=dict)
    all_holes: bool = False

    @property
    def has_holes(self) -> bool:
        return self.all_holes or any(is_hole(v) for v in self.terms.values())

    def parents(self) -> set:
        return {n for key in self.terms for n in key}

    def to_row(self, parents: Sequence[str]) -> tuple:
        """Coefficient row over the input library of ``parents``.

        Terms naming a parent that is not in ``parents`` are dropped.
        """
        d = len(parents)
        if self.all_holes:
            return (HOLE,) * zeta_length(d)
        pos = {p: i for i, p in enumerate(parents)}
        row: list = [0.0] * zeta_length(d)
        for key, coef in self.terms.items():
            if not all(n in pos for n in key):
                continue
            row[zeta_position(tuple(pos[n] for n in key), d)] = coef
        return tuple(row)

    @classmethod
    def from_row(cls, row: Sequence[Coef], parents: Sequence[str]) -> "ParamExpression":
        terms = {}
        for coef, key in zip(row, zeta_keys(len(parents))):
            if is_hole(coef) or coef != 0:
                terms[tuple(parents[i] for i in key)] = coef if is_hole(coef) else float(coef)
        return cls(terms)


@dataclass
class NodeBody:
    distribution: str
    params: dict
    corrections: dict = field(default_factory=dict)
    dtype: Optional[str] = None

    @property
    def has_holes(self) -> bool:
        return any(e.has_holes for e in self.params.values())


@dataclass
class NodeEntry:
    """A node declaration; ``body`` is ``None`` for a randomized distribution."""

    name: str
    body: Optional[NodeBody] = None
    optional: bool = False
    p: Optional[float] = None
    line: int = field(default=0, compare=False)

    @property
    def is_fixed(self) -> bool:
        return not self.optional and self.body is not None and not self.body.has_holes


@dataclass
class EdgeFunctionDecl:
    name: str
    params: dict = field(default_factory=dict)

    @property
    def has_holes(self) -> bool:
        return any(is_hole(v) for v in self.params.values())


@dataclass
class EdgeEntry:
    """An edge declaration.

    ``presence`` is ``fixed``, ``optional`` or ``required_if_exists``;
    ``function`` is ``None`` when the edge function is randomized; ``correction``
    is ``None`` when undeclared.
    """

    source: str
    target: str
    function: Optional[EdgeFunctionDecl] = None
    correction: Optional[EdgeCorrection] = None
    presence: str = "fixed"
    p: Optional[float] = None
    line: int = field(default=0, compare=False)

    @property
    def is_fixed(self) -> bool:
        return self.presence == "fixed" and self.function is not None and not self.function.has_holes


@dataclass
class PartialGraph:
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)

    def __post_init__(self):
        self.nodes = list(self.nodes)
        index = {n.name: i for i, n in enumerate(self.nodes)}
        big = len(index)
        self.edges = sorted(self.edges, key=lambda e: (index.get(e.source, big), index.get(e.target, big)))

    @property
    def names(self) -> list:
        return [n.name for n in self.nodes]

    def node(self, name: str) -> NodeEntry:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def potential_parents(self, name: str) -> list:
        index = {n: i for i, n in enumerate(self.names)}
        return sorted({e.source for e in self.edges if e.target == name}, key=index.__getitem__)

    @property
    def is_fixed(self) -> bool:
        return all(n.is_fixed for n in self.nodes) and all(e.is_fixed for e in self.edges)

    def to_graph(self) -> Graph:
        """Convert a fully fixed description into a :class:`Graph`."""
        if not self.is_fixed:
            raise ParcsError("description has random or optional elements; randomize it first")
        nodes = []
        for n in self.nodes:
            parents = self.potential_parents(n.name)
            b = n.body
            nodes.append(
                NodeSpec(
                    n.name,
                    b.distribution,
                    {p: b.params[p].to_row(parents) for p in b.params},
                    dict(b.corrections),
                    b.dtype,
                )
            )
        edges = [
            EdgeSpec(e.source, e.target, EdgeFunction(e.function.name, dict(e.function.params)),
                     e.correction or EdgeCorrection())
            for e in self.edges
        ]
        return Graph(nodes, edges)

    @classmethod
    def from_graph(cls, graph: Graph) -> "PartialGraph":
        nodes = []
        for nd in graph.nodes:
            parents = graph.parents(nd.name)
            default = get_distribution(nd.distribution).dtype
            body = NodeBody(
                nd.distribution,
                {p: ParamExpression.from_row(row, parents) for p, row in nd.params.items()},
                dict(nd.corrections),
                None if nd.dtype == default else nd.dtype,
            )
            nodes.append(NodeEntry(nd.name, body))
        edges = [
            EdgeEntry(e.source, e.target, EdgeFunctionDecl(e.function.name, dict(e.function.params)),
                      e.correction if e.correction.enabled else None)
            for e in graph.edges
        ]
        return cls(nodes, edges)


# --------------------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#.*)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<pow>\*\*)
  | (?P<op>[(){},=:+\-*^?\[\]])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    col: int


def tokenize(line: str, lineno: int) -> list:
    out, pos = [], 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise PDLSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            text = m.group()
            if kind == "arrow" or kind == "pow" or kind == "op":
                kind = text
            out.append(Token(kind, text, pos + 1))
        pos = m.end()
    out.append(Token("eol", "", len(line) + 1))
    return out


class _Cursor:
    def __init__(self, tokens, lineno):
        self.toks = tokens
        self.i = 0
        self.lineno = lineno

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k=1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, expected=None, tok=None):
        tok = tok or self.tok
        return PDLSyntaxError(msg, self.lineno, tok.col, expected)

    def accept(self, kind, text=None):
        t = self.tok
        if t.kind == kind and (text is None or t.text == text):
            self.i += 1
            return t
        return None

    def expect(self, kind, text=None, what=None):
        t = self.accept(kind, text)
        if t is None:
            want = what or repr(text or kind)
            got = self.tok.text or "end of line"
            raise self.error(f"unexpected {got!r}", want)
        return t

    def number(self, allow_sign=True) -> float:
        sign = 1.0
        if allow_sign:
            while self.tok.kind in ("+", "-"):
                if self.tok.kind == "-":
                    sign = -sign
                self.i += 1
        t = self.expect("num", what="a number")
        val = sign * float(t.text)
        if not math.isfinite(val):
            raise self.error(f"number {t.text!r} is not finite", tok=t)
        return val

    def keyword(self, word):
        return self.accept("name", word)


# --------------------------------------------------------------------------- expressions


def _parse_terms(cur: _Cursor, stop=(",", ")", "eol", "}")) -> list:
    """Raw terms ``(coef, names, token)`` of a polynomial, up to a stop token."""
    terms = []
    first = True
    while True:
        sign = 1.0
        if cur.tok.kind in ("+", "-"):
            while cur.tok.kind in ("+", "-"):
                if cur.tok.kind == "-":
                    sign = -sign
                cur.i += 1
        elif not first:
            break
        start = cur.tok
        coef: Coef = sign
        names: list = []
        saw_factor = False
        while True:
            t = cur.tok
            if t.kind == "num":
                cur.i += 1
                v = float(t.text)
                if not math.isfinite(v):
                    raise cur.error(f"number {t.text!r} is not finite", tok=t)
                if is_hole(coef):
                    raise cur.error("a free coefficient '?' cannot be scaled", tok=t)
                coef = coef * v
            elif t.kind == "?":
                cur.i += 1
                if is_hole(coef) or coef not in (1.0, -1.0):
                    raise cur.error("a free coefficient '?' cannot be scaled", tok=t)
                coef = HOLE
            elif t.kind == "name":
                cur.i += 1
                power = 1
                if cur.tok.kind in ("^", "**"):
                    cur.i += 1
                    pt = cur.expect("num", what="an integer exponent")
                    if not re.fullmatch(r"\d+", pt.text):
                        raise cur.error("exponents must be integers", tok=pt)
                    power = int(pt.text)
                if len(names) + power > 2:
                    raise NonQuadraticTerm(
                        f"line {cur.lineno}, col {start.col}: term of degree above 2; "
                        "introduce an intermediate deterministic node instead"
                    )
                names.extend([t.text] * power)
            else:
                raise cur.error(f"unexpected {t.text or 'end of line'!r}", "a number, '?' or a parent name")
            saw_factor = True
            if not cur.accept("*"):
                break
        if not saw_factor:
            raise cur.error("empty term")
        if len(names) > 2:
            raise NonQuadraticTerm(
                f"line {cur.lineno}, col {start.col}: term of degree {len(names)} exceeds 2; "
                "introduce an intermediate deterministic node instead"
            )
        terms.append((coef, tuple(names), start))
        first = False
        if cur.tok.kind in stop:
            break
    if cur.tok.kind not in stop:
        raise cur.error(f"unexpected {cur.tok.text!r}", "'+', '-' or end of expression")
    return terms


def _build_expression(raw, parents: Sequence[str], lineno=None, lone_hole=False) -> ParamExpression:
    order = {p: i for i, p in enumerate(parents)}
    where = f"line {lineno}: " if lineno else ""
    if lone_hole and parents:
        return ParamExpression(all_holes=True)
    terms: dict = {}
    for coef, names, tok in raw:
        for n in names:
            if n not in order:
                raise UnknownParentInExpression(
                    f"{where}{n!r} is not a parent (parents: {list(parents)})"
                )
        key = tuple(sorted(names, key=order.__getitem__))
        if key in terms:
            old = terms[key]
            if is_hole(old) != is_hole(coef):
                raise PDLSyntaxError(
                    f"coefficient of {'*'.join(key) or 'bias'} is both fixed and free", lineno, tok.col
                )
            terms[key] = HOLE if is_hole(coef) else old + coef
        else:
            terms[key] = coef
    return ParamExpression({k: v for k, v in terms.items() if is_hole(v) or v != 0})


def _is_lone_hole(raw) -> bool:
    return len(raw) == 1 and is_hole(raw[0][0]) and raw[0][1] == ()


def parse_param_expression(text: str, parents: Sequence[str]) -> ParamExpression:
    """Parse one parameter expression against a fixed parent list."""
    if "\n" in text:
        raise PDLSyntaxError("expressions must fit on one line", 1, text.index("\n") + 1)
    cur = _Cursor(tokenize(text, 1), 1)
    raw = _parse_terms(cur, stop=("eol",))
    return _build_expression(raw, parents, lone_hole=_is_lone_hole(raw))


# --------------------------------------------------------------------------- declarations


def _parse_probability(cur: _Cursor) -> Optional[float]:
    if not cur.accept("("):
        return None
    cur.expect("name", "p", what="'p'")
    cur.expect("=")
    t = cur.tok
    p = cur.number()
    if not 0.0 <= p <= 1.0:
        raise cur.error(f"probability {p} outside [0, 1]", tok=t)
    cur.expect(")")
    return p


def _parse_node_body(cur: _Cursor):
    t = cur.expect("name", what="a distribution name or 'random'")
    if t.text == "random":
        return None
    if t.text not in DISTRIBUTIONS:
        raise cur.error(f"unknown distribution {t.text!r}", f"one of {sorted(DISTRIBUTIONS)}", tok=t)
    dist = DISTRIBUTIONS[t.text]
    raw_params = {}
    if cur.accept("("):
        if not cur.accept(")"):
            while True:
                pt = cur.expect("name", what="a parameter name")
                if pt.text not in dist.params:
                    raise cur.error(f"{dist.name} has no parameter {pt.text!r}", f"one of {list(dist.params)}", tok=pt)
                if pt.text in raw_params:
                    raise cur.error(f"parameter {pt.text!r} given twice", tok=pt)
                cur.expect("=")
                raw_params[pt.text] = (_parse_terms(cur), pt)
                if cur.accept(")"):
                    break
                cur.expect(",", what="',' or ')'")
    for p in dist.params:
        if p not in raw_params:
            raise cur.error(f"{dist.name} needs parameter {p!r}", tok=t)

    corrections: dict = {}
    target: dict = {}
    dtype = None
    while cur.tok.kind == ",":
        cur.i += 1
        kw = cur.expect("name", what="'correction', 'target_mean' or 'dtype'")
        if kw.text == "correction":
            cur.expect("(")
            param = dist.params[0] if dist.params else None
            if cur.tok.kind == "name":
                pt = cur.expect("name")
                if pt.text not in dist.params:
                    raise cur.error(f"{dist.name} has no parameter {pt.text!r}", tok=pt)
                param = pt.text
                cur.expect(",")
            lo = cur.number()
            cur.expect(",")
            hi = cur.number()
            offset = 0.0
            if cur.accept(","):
                cur.expect("name", "offset", what="'offset'")
                cur.expect("=")
                offset = cur.number()
            cur.expect(")")
            if param is None:
                raise cur.error(f"{dist.name} has no parameter to correct", tok=kw)
            if param in corrections:
                raise cur.error(f"second correction for parameter {param!r}", tok=kw)
            if not lo < hi:
                raise cur.error(f"correction needs lower < upper, got ({lo}, {hi})", tok=kw)
            corrections[param] = (lo, hi, offset)
        elif kw.text == "target_mean":
            param = dist.params[0] if dist.params else None
            if cur.accept("("):
                pt = cur.expect("name", what="a parameter name")
                param = pt.text
                cur.expect(")")
            cur.expect("=")
            target[param] = (cur.number(), kw)
        elif kw.text == "dtype":
            cur.expect("=")
            dt = cur.expect("name", what="continuous, binary or count")
            if dt.text not in ("continuous", "binary", "count"):
                raise cur.error(f"unknown dtype {dt.text!r}", "continuous, binary or count", tok=dt)
            dtype = dt.text
        else:
            raise cur.error(f"unknown node option {kw.text!r}", "'correction', 'target_mean' or 'dtype'", tok=kw)

    corr_objs = {}
    for param, (lo, hi, off) in corrections.items():
        tm = target.pop(param, (None, None))[0]
        if tm is not None and not lo < tm < hi:
            raise PDLSyntaxError(f"target_mean {tm} outside ({lo}, {hi})", cur.lineno)
        corr_objs[param] = NodeCorrection(lo, hi, tm, off)
    if target:
        param, (_, kw) = next(iter(target.items()))
        raise cur.error(f"target_mean for {param!r} needs a correction on that parameter", tok=kw)
    return dist.name, raw_params, corr_objs, dtype


def _parse_edge_body(cur: _Cursor):
    t = cur.expect("name", what="an edge function or 'random'")
    func = None
    if t.text != "random":
        if t.text not in EDGE_FUNCTION_PARAMS:
            raise cur.error(f"unknown edge function {t.text!r}", f"one of {sorted(EDGE_FUNCTION_PARAMS)}", tok=t)
        names = EDGE_FUNCTION_PARAMS[t.text]
        params: dict = {}
        if cur.accept("("):
            if not cur.accept(")"):
                while True:
                    pt = cur.expect("name", what="a parameter name")
                    if pt.text not in names:
                        raise cur.error(f"{t.text} has no parameter {pt.text!r}", f"one of {list(names)}", tok=pt)
                    if pt.text in params:
                        raise cur.error(f"parameter {pt.text!r} given twice", tok=pt)
                    cur.expect("=")
                    if cur.accept("?"):
                        params[pt.text] = HOLE
                    else:
                        vt = cur.tok
                        v = cur.number()
                        if t.text == "power" and not v > 0:
                            raise cur.error("power requires phi > 0", tok=vt)
                        params[pt.text] = v
                    if cur.accept(")"):
                        break
                    cur.expect(",", what="',' or ')'")
        for n in names:
            if n not in params:
                raise cur.error(f"edge function {t.text} needs parameter {n!r}", tok=t)
        func = EdgeFunctionDecl(t.text, params)
    correction = None
    if cur.accept(","):
        cur.expect("name", "correction", what="'correction'")
        correction = EdgeCorrection(True)
        if cur.accept("("):
            cur.expect("name", "mu", what="'mu'")
            cur.expect("=")
            mu = cur.number()
            cur.expect(",")
            cur.expect("name", "sigma", what="'sigma'")
            cur.expect("=")
            st = cur.tok
            sigma = cur.number()
            if not sigma > 0:
                raise cur.error("edge correction sigma must be positive", tok=st)
            cur.expect(")")
            correction = EdgeCorrection(True, mu, sigma)
    return func, correction


def _parse_node_line(cur: _Cursor):
    name = cur.expect("name", what="a node name").text
    cur.expect(":")
    optional, p = False, None
    if cur.tok.kind == "name" and cur.tok.text == "optional" and cur.peek().kind in ("(", "{", "eol"):
        cur.i += 1
        optional = True
        p = _parse_probability(cur)
        if cur.accept("{"):
            body = _parse_node_body(cur)
            cur.expect("}")
        else:
            body = None
    else:
        body = _parse_node_body(cur)
    cur.expect("eol", what="end of line")
    return name, body, optional, p


def _parse_edge_line(cur: _Cursor):
    src = cur.expect("name", what="a source node").text
    cur.expect("->")
    dst = cur.expect("name", what="a target node").text
    cur.expect(":")
    presence, p = "fixed", None
    func, corr = None, None
    kw = cur.tok
    if kw.kind == "name" and kw.text in ("optional", "required_if_exists") and cur.peek().kind in ("(", "{", "eol"):
        cur.i += 1
        presence = kw.text
        if presence == "optional":
            p = _parse_probability(cur)
        if cur.accept("{"):
            func, corr = _parse_edge_body(cur)
            cur.expect("}")
    else:
        func, corr = _parse_edge_body(cur)
    cur.expect("eol", what="end of line")
    return src, dst, func, corr, presence, p


def parse_description(text: str) -> PartialGraph:
    """Parse a ``.pdl`` document.

    Raises a :class:`ParcsError` subclass carrying the line (and column, for
    syntax errors) of the first problem.
    """
    raw_nodes = []
    raw_edges = []
    declared: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        cur = _Cursor(tokenize(line, lineno), lineno)
        if cur.tok.kind == "eol":
            continue
        head = cur.expect("name", what="'node' or 'edge'")
        if head.text == "node":
            name, body, optional, p = _parse_node_line(cur)
            if name in declared:
                raise DuplicateNode(f"line {lineno}: node {name!r} already declared on line {declared[name]}")
            declared[name] = lineno
            raw_nodes.append((name, body, optional, p, lineno))
        elif head.text == "edge":
            raw_edges.append(_parse_edge_line(cur) + (lineno,))
        else:
            raise cur.error(f"unknown declaration {head.text!r}", "'node' or 'edge'", tok=head)

    seen_edges: dict = {}
    edges = []
    for src, dst, func, corr, presence, p, lineno in raw_edges:
        for end in (src, dst):
            if end not in declared:
                raise UnknownParent(f"line {lineno}: edge {src}->{dst} refers to undeclared node {end!r}")
        if src == dst:
            raise PDLSyntaxError(f"self-loop on {src}", lineno)
        if (src, dst) in seen_edges:
            raise PDLSyntaxError(f"edge {src}->{dst} already declared on line {seen_edges[(src, dst)]}", lineno)
        seen_edges[(src, dst)] = lineno
        edges.append(EdgeEntry(src, dst, func, corr, presence, p, lineno))

    order = {n[0]: i for i, n in enumerate(raw_nodes)}
    nodes = []
    for name, body, optional, p, lineno in raw_nodes:
        parents = sorted({e.source for e in edges if e.target == name}, key=order.__getitem__)
        nb = None
        if body is not None:
            dist, raw_params, corrs, dtype = body
            params = {}
            for pname in get_distribution(dist).params:
                raw, _tok = raw_params[pname]
                params[pname] = _build_expression(raw, parents, lineno, lone_hole=_is_lone_hole(raw))
            if dtype == get_distribution(dist).dtype:
                dtype = None
            nb = NodeBody(dist, params, corrs, dtype)
        nodes.append(NodeEntry(name, nb, optional, p, lineno))
    return PartialGraph(nodes, edges)


def load_description(path) -> PartialGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_description(fh.read())


# --------------------------------------------------------------------------- serialization


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0:
        return "0"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _fmt_expression(expr: ParamExpression, parents: Sequence[str]) -> str:
    if expr.all_holes:
        return "?"
    order = {p: i for i, p in enumerate(parents)}
    d = len(parents)

    def rank(key):
        return zeta_position(tuple(order[n] for n in key), d) if all(n in order for n in key) else 10**9

    keys = sorted(expr.terms, key=lambda k: (rank(k), k))
    parts = []
    for key in keys:
        coef = expr.terms[key]
        if not is_hole(coef) and coef == 0:
            continue
        names = "*".join(key)
        if is_hole(coef):
            body, neg = "?" + ("*" + names if names else ""), False
        else:
            neg = coef < 0
            mag = _fmt(abs(coef))
            if names:
                body = names if mag == "1" else f"{mag}*{names}"
            else:
                body = mag
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    if not parts:
        return "0"
    if len(parts) == 1 and parts[0] == "?" and parents:
        # a lone '?' would free the whole row
        return f"? + 0*{parents[0]}"
    return " ".join(parts)


def _fmt_node_body(body: NodeBody, parents: Sequence[str]) -> str:
    dist = get_distribution(body.distribution)
    args = ", ".join(f"{p}={_fmt_expression(body.params[p], parents)}" for p in dist.params)
    out = f"{dist.name}({args})"
    for p in dist.params:
        c = body.corrections.get(p)
        if c is None:
            continue
        first = p == dist.params[0]
        inner = f"{_fmt(c.lower)}, {_fmt(c.upper)}"
        if not first:
            inner = f"{p}, " + inner
        if c.offset != 0:
            inner += f", offset={_fmt(c.offset)}"
        out += f", correction({inner})"
        if c.target_mean is not None:
            out += f", target_mean={_fmt(c.target_mean)}" if first else f", target_mean({p})={_fmt(c.target_mean)}"
    if body.dtype is not None and body.dtype != dist.dtype:
        out += f", dtype={body.dtype}"
    return out


def _fmt_edge_body(func: Optional[EdgeFunctionDecl], corr: Optional[EdgeCorrection]) -> str:
    if func is None:
        out = "random"
    else:
        names = EDGE_FUNCTION_PARAMS[func.name]
        if names:
            args = ", ".join(
                f"{k}={'?' if is_hole(func.params[k]) else _fmt(func.params[k])}" for k in names
            )
            out = f"{func.name}({args})"
        else:
            out = func.name
    if corr is not None and corr.enabled:
        if corr.mu == 0.0 and corr.sigma == 1.0:
            out += ", correction"
        else:
            out += f", correction(mu={_fmt(corr.mu)}, sigma={_fmt(corr.sigma)})"
    return out


def serialize(graph) -> str:
    """Canonical text of a :class:`Graph` or :class:`PartialGraph`.

    Nodes keep declaration order; edges are sorted by (source, target)
    declaration position. ``parse_description(serialize(g))`` equals ``g``.
    """
    pg = PartialGraph.from_graph(graph) if isinstance(graph, Graph) else graph
    lines = []
    for n in pg.nodes:
        parents = pg.potential_parents(n.name)
        body = "random" if n.body is None else _fmt_node_body(n.body, parents)
        if n.optional:
            head = "optional" if n.p is None else f"optional(p={_fmt(n.p)})"
            body = head if n.body is None else f"{head} {{ {body} }}"
        lines.append(f"node {n.name} : {body}")
    for e in pg.edges:
        body = _fmt_edge_body(e.function, e.correction)
        if e.presence != "fixed":
            head = e.presence
            if e.presence == "optional" and e.p is not None:
                head = f"optional(p={_fmt(e.p)})"
            if e.function is None and e.correction is None:
                body = head
            else:
                body = f"{head} {{ {body} }}"
        lines.append(f"edge {e.source}->{e.target} : {body}")
    return "\n".join(lines) + ("\n" if lines else "")


def dump_description(graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(graph))
