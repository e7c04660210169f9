"""Randomization guidelines (``.gdl`` files).

A guideline is the search space for everything a partial description leaves
open. Keys live in three sections; a key may also appear before any section::

    nodes:
      distributions: normal, bernoulli, uniform(low=0, high=1)
      coef_range: [-5,-1] U [1,5]
      existence: 0.5
      library: full
    edges:
      functions: identity, sigmoid(alpha=[0.5,2], beta=[-1,1], gamma=1)
      sparsity: 0.5
      correction: off
      groups: Z=Z*, R=R*
      mask: Z->R=1, R->R=0
    corrections:
      policy: bounded-params-only
      range: [-10, 10]
      target_mean: [0.3, 0.7]
"""
from __future__ import annotations

import fnmatch
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import DISTRIBUTIONS, get_distribution
from .edge_functions import EDGE_FUNCTION_PARAMS
from .exceptions import EmptyChoiceList, InvalidRange, PDLSyntaxError

DEFAULT_FUNCTION_RANGES = {"alpha": (0.5, 2.0), "beta": (-1.0, 1.0), "gamma": (1.0, 1.0), "phi": (0.75, 1.25)}
POLICIES = ("always", "bounded-params-only", "never")


@dataclass(frozen=True)
class IntervalUnion:
    """Union of closed intervals, sampled uniformly by length."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise InvalidRange("interval union is empty")
        for a, b in ivs:
            if not (math.isfinite(a) and math.isfinite(b)):
                raise InvalidRange(f"interval [{a}, {b}] is not finite")
            if a > b:
                raise InvalidRange(f"interval [{a}, {b}] has lower > upper")
        object.__setattr__(self, "intervals", ivs)

    @classmethod
    def point(cls, x: float) -> "IntervalUnion":
        return cls(((x, x),))

    def contains(self, x) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def sample(self, rng: np.random.Generator) -> float:
        total = sum(b - a for a, b in self.intervals)
        if total == 0:
            return self.intervals[int(rng.integers(len(self.intervals)))][0]
        # one uniform laid along the concatenated intervals
        t = rng.random() * total
        for a, b in self.intervals:
            if t < b - a:
                return a + t
            t -= b - a
        return self.intervals[-1][1]

    def __str__(self):
        return " U ".join(f"[{a!r}, {b!r}]" for a, b in self.intervals)


@dataclass(frozen=True)
class FunctionTemplate:
    name: str
    ranges: dict = field(default_factory=dict)

    def param_range(self, p: str) -> tuple:
        return self.ranges.get(p, DEFAULT_FUNCTION_RANGES[p])


@dataclass(frozen=True)
class DistributionTemplate:
    """A distribution choice; ``pinned`` parameters get a constant row."""

    name: str
    pinned: dict = field(default_factory=dict)


@dataclass
class Guideline:
    distributions: list = field(default_factory=lambda: [DistributionTemplate("normal"), DistributionTemplate("bernoulli")])
    coef_range: IntervalUnion = field(default_factory=lambda: IntervalUnion(((-1.0, 1.0),)))
    functions: list = field(default_factory=lambda: [FunctionTemplate("identity")])
    sparsity: tuple = (0.5, 0.5)
    node_existence: float = 0.5
    library: str = "full"
    edge_correction: bool = False
    groups: dict = field(default_factory=dict)
    mask: dict = field(default_factory=dict)
    forbidden: frozenset = frozenset()
    correction_policy: str = "bounded-params-only"
    correction_range: tuple = (-10.0, 10.0)
    target_mean: Optional[tuple] = None

    def __post_init__(self):
        if not self.distributions:
            raise EmptyChoiceList("guideline lists no distributions")
        if not self.functions:
            raise EmptyChoiceList("guideline lists no edge functions")
        if isinstance(self.sparsity, (int, float)):
            self.sparsity = (float(self.sparsity), float(self.sparsity))
        lo, hi = self.sparsity
        if not 0.0 <= lo <= hi <= 1.0:
            raise InvalidRange(f"sparsity range [{lo}, {hi}] not inside [0, 1]")
        if not 0.0 <= self.node_existence <= 1.0:
            raise InvalidRange(f"node existence probability {self.node_existence} not in [0, 1]")
        if self.correction_policy not in POLICIES:
            raise InvalidRange(f"unknown correction policy {self.correction_policy!r}; choose from {POLICIES}")
        if self.library not in ("full", "linear"):
            raise InvalidRange(f"unknown library {self.library!r}; choose 'full' or 'linear'")
        a, b = self.correction_range
        if not a < b:
            raise InvalidRange(f"correction range [{a}, {b}] is empty")
        if isinstance(self.target_mean, (int, float)):
            self.target_mean = (float(self.target_mean), float(self.target_mean))
        if self.target_mean is not None and not self.target_mean[0] <= self.target_mean[1]:
            raise InvalidRange(f"target mean range {self.target_mean} is empty")
        self.forbidden = frozenset(self.forbidden)

    def group_of(self, name: str) -> Optional[str]:
        for g, patterns in self.groups.items():
            if any(fnmatch.fnmatchcase(name, pat) for pat in patterns):
                return g
        return None

    def allows(self, source: str, target: str) -> bool:
        """Whether the connection mask permits an edge ``source -> target``."""
        if (source, target) in self.forbidden:
            return False
        if not self.mask:
            return True
        key = (self.group_of(source), self.group_of(target))
        return bool(self.mask.get(key, True))


# --------------------------------------------------------------------------- parsing

_KEYS = {
    "distributions": "nodes",
    "coef_range": "nodes",
    "existence": "nodes",
    "library": "nodes",
    "functions": "edges",
    "sparsity": "edges",
    "correction": "edges",
    "groups": "edges",
    "mask": "edges",
    "policy": "corrections",
    "range": "corrections",
    "target_mean": "corrections",
}

_NUM = r"[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
_INTERVAL_RE = re.compile(rf"^\[\s*({_NUM})\s*,\s*({_NUM})\s*\]$")


def _number(text: str, lineno: int) -> float:
    if not re.fullmatch(_NUM, text.strip()):
        raise PDLSyntaxError(f"not a number: {text.strip()!r}", lineno, expected="a number")
    v = float(text)
    if not math.isfinite(v):
        raise PDLSyntaxError(f"number {text.strip()!r} is not finite", lineno)
    return v


def parse_interval_union(text: str, lineno: int = 1) -> IntervalUnion:
    """``[a,b] U [c,d]`` (``u``/``∪`` also accepted) or a single number."""
    text = text.strip()
    if not text:
        raise PDLSyntaxError("empty interval", lineno, expected="[a, b] U [c, d]")
    if not text.startswith("["):
        v = _number(text, lineno)
        return IntervalUnion.point(v)
    parts = re.split(r"\s*(?:\bU\b|\bu\b|∪)\s*", text)
    ivs = []
    for part in parts:
        m = _INTERVAL_RE.match(part.strip())
        if not m:
            raise PDLSyntaxError(f"bad interval {part.strip()!r}", lineno, expected="[a, b]")
        ivs.append((_number(m.group(1), lineno), _number(m.group(2), lineno)))
    return IntervalUnion(tuple(ivs))


def _interval(text: str, lineno: int) -> tuple:
    u = parse_interval_union(text, lineno)
    if len(u.intervals) != 1:
        raise PDLSyntaxError("expected a single interval", lineno, expected="[a, b] or a number")
    return u.intervals[0]


def _split_top(text: str, lineno: int) -> list:
    """Split on commas outside brackets and parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise PDLSyntaxError("unbalanced brackets", lineno)
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise PDLSyntaxError("unbalanced brackets", lineno)
    out.append("".join(cur).strip())
    return [x for x in out if x]


_TEMPLATE_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?$", re.S)


def _template(text: str, lineno: int):
    m = _TEMPLATE_RE.match(text.strip())
    if not m:
        raise PDLSyntaxError(f"bad choice {text.strip()!r}", lineno, expected="NAME or NAME(k=v, ...)")
    name, args = m.group(1), m.group(2)
    kv = {}
    if args is not None:
        for item in _split_top(args, lineno):
            if "=" not in item:
                raise PDLSyntaxError(f"bad argument {item!r}", lineno, expected="k=v")
            k, v = (s.strip() for s in item.split("=", 1))
            if k in kv:
                raise PDLSyntaxError(f"argument {k!r} given twice", lineno)
            kv[k] = v
    return name, kv


def _bool(text: str, lineno: int) -> bool:
    t = text.strip().lower()
    if t in ("on", "true", "yes", "1"):
        return True
    if t in ("off", "false", "no", "0"):
        return False
    raise PDLSyntaxError(f"expected on/off, got {text.strip()!r}", lineno, expected="on or off")


def parse_guideline(text: str) -> Guideline:
    """Parse a ``.gdl`` document into a :class:`Guideline`."""
    kwargs: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        if ":" not in line:
            raise PDLSyntaxError(f"cannot read {line.strip()!r}", lineno, expected="'key: value' or 'section:'")
        key, value = (s.strip() for s in line.split(":", 1))
        if key in ("nodes", "edges", "corrections") and not value:
            section = key
            continue
        if key not in _KEYS:
            raise PDLSyntaxError(f"unknown key {key!r}", lineno, 1, expected=f"one of {sorted(_KEYS)}")
        if section is not None and _KEYS[key] != section:
            raise PDLSyntaxError(f"key {key!r} belongs in section '{_KEYS[key]}:', not '{section}:'", lineno)
        if key in kwargs or (key == "policy" and "correction_policy" in kwargs):
            raise PDLSyntaxError(f"key {key!r} given twice", lineno)

        if key == "distributions":
            choices = []
            for item in _split_top(value, lineno):
                name, kv = _template(item, lineno)
                if name not in DISTRIBUTIONS or DISTRIBUTIONS[name].data_backed:
                    raise PDLSyntaxError(f"unknown distribution {name!r}", lineno)
                dist = get_distribution(name)
                pinned = {}
                for k, v in kv.items():
                    if k not in dist.params:
                        raise PDLSyntaxError(f"{name} has no parameter {k!r}", lineno)
                    pinned[k] = _number(v, lineno)
                choices.append(DistributionTemplate(name, pinned))
            if not choices:
                raise EmptyChoiceList(f"line {lineno}: distribution list is empty")
            kwargs["distributions"] = choices
        elif key == "functions":
            choices = []
            for item in _split_top(value, lineno):
                name, kv = _template(item, lineno)
                if name not in EDGE_FUNCTION_PARAMS:
                    raise PDLSyntaxError(f"unknown edge function {name!r}", lineno)
                ranges = {}
                for k, v in kv.items():
                    if k not in EDGE_FUNCTION_PARAMS[name]:
                        raise PDLSyntaxError(f"{name} has no parameter {k!r}", lineno)
                    ranges[k] = _interval(v, lineno)
                if name == "power" and "phi" in ranges and ranges["phi"][0] <= 0:
                    raise InvalidRange(f"line {lineno}: power needs phi > 0")
                choices.append(FunctionTemplate(name, ranges))
            if not choices:
                raise EmptyChoiceList(f"line {lineno}: edge function list is empty")
            kwargs["functions"] = choices
        elif key == "coef_range":
            kwargs["coef_range"] = parse_interval_union(value, lineno)
        elif key == "existence":
            kwargs["node_existence"] = _number(value, lineno)
        elif key == "library":
            kwargs["library"] = value
        elif key == "sparsity":
            kwargs["sparsity"] = _interval(value, lineno)
        elif key == "correction":
            kwargs["edge_correction"] = _bool(value, lineno)
        elif key == "groups":
            groups = {}
            for item in _split_top(value, lineno):
                if "=" not in item:
                    raise PDLSyntaxError(f"bad group {item!r}", lineno, expected="NAME=PATTERN [PATTERN ...]")
                g, pats = (s.strip() for s in item.split("=", 1))
                if not pats:
                    raise PDLSyntaxError(f"group {g!r} has no patterns", lineno)
                groups[g] = tuple(pats.split())
            kwargs["groups"] = groups
        elif key == "mask":
            mask = {}
            for item in _split_top(value, lineno):
                m = re.fullmatch(r"(\w+)\s*->\s*(\w+)\s*(?:=\s*([01]))?", item)
                if not m:
                    raise PDLSyntaxError(f"bad mask entry {item!r}", lineno, expected="SRC->DST=0|1")
                mask[(m.group(1), m.group(2))] = m.group(3) != "0"
            kwargs["mask"] = mask
        elif key == "policy":
            kwargs["correction_policy"] = value
        elif key == "range":
            kwargs["correction_range"] = _interval(value, lineno)
        elif key == "target_mean":
            kwargs["target_mean"] = None if value.lower() == "none" else _interval(value, lineno)
    g = Guideline(**kwargs)
    for gs, gt in g.mask:
        for grp in (gs, gt):
            if grp not in g.groups:
                raise PDLSyntaxError(f"mask refers to undefined group {grp!r}")
    return g


def load_guideline(path) -> Guideline:
    with open(path, encoding="utf-8") as fh:
        return parse_guideline(fh.read())
