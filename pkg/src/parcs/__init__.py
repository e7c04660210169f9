"""Causal data-generating processes from partially specified graphs."""

__version__ = "0.1.0"

from .corrections import EdgeCorrection, NodeCorrection, calibrate_offset, node_correction
from .description import PartialGraph, load_description, parse_description, serialize
from .distributions import DISTRIBUTIONS, icdf_sample
from .edge_functions import EdgeFunction
from .engine import (
    ReplaceDistribution,
    SampleBatch,
    SetConstant,
    SeverParents,
    instantiate,
    intervene,
    sample,
    sample_with_errors,
)
from .estimators import GraphSampler, MissingnessAmputer
from .exceptions import ParcsError
from .graph import EdgeSpec, Graph, NodeSpec, compute_theta, validate, zeta
from .guideline import Guideline, IntervalUnion, parse_guideline
from .lingam import lingam_preset
from .missingness import Mechanism, apply_missingness, build_mgraph, mechanism_mask
from .randomizer import RandomizationTrace, randomize, replay

__all__ = [
    "DISTRIBUTIONS",
    "EdgeCorrection",
    "EdgeFunction",
    "EdgeSpec",
    "Graph",
    "GraphSampler",
    "Guideline",
    "IntervalUnion",
    "Mechanism",
    "MissingnessAmputer",
    "NodeCorrection",
    "NodeSpec",
    "ParcsError",
    "PartialGraph",
    "RandomizationTrace",
    "ReplaceDistribution",
    "SampleBatch",
    "SetConstant",
    "SeverParents",
    "apply_missingness",
    "build_mgraph",
    "calibrate_offset",
    "compute_theta",
    "icdf_sample",
    "instantiate",
    "intervene",
    "lingam_preset",
    "load_description",
    "mechanism_mask",
    "node_correction",
    "parse_description",
    "parse_guideline",
    "randomize",
    "replay",
    "sample",
    "sample_with_errors",
    "serialize",
    "validate",
    "zeta",
]
