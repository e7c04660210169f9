"""``parcs`` command line.

Exit codes: 0 success, 2 invalid input (syntax, validation, calibration),
3 file system errors. The master seed comes from ``--seed``, else the
``PARCS_SEED`` environment variable, else fresh entropy; it is always recorded
in the run manifest, and ``parcs rerun MANIFEST`` repeats a run exactly.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace


from . import __version__
from ._seeding import derive_seed, resolve_seed
from .description import load_description, serialize
from .engine import DEFAULT_BURN_IN, SetConstant, instantiate, intervene, sample, sample_with_errors
from .exceptions import InvalidRange, ParcsError
from .guideline import Guideline, load_guideline
from .io import read_csv, write_csv, write_frame
from .lingam import adjacency_matrix, causal_order, lingam_preset
from .missingness import MGRAPH_BURN_IN, Mechanism, build_mgraph, sample_masked, write_masked
from .randomizer import randomize

DEFAULT_ITERATIONS = 10


class UsageError(ParcsError):
    pass


def _master_seed(args) -> tuple:
    if args.seed is not None:
        return int(args.seed), "flag"
    env = os.environ.get("PARCS_SEED")
    if env:
        try:
            return int(env), "env"
        except ValueError:
            raise UsageError(f"PARCS_SEED must be an integer, got {env!r}") from None
    return resolve_seed(None), "entropy"


def _sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write_manifest(path, argv, args, seed, derived, inputs, outputs) -> None:
    argv = list(argv)
    if "--seed" not in argv:
        argv += ["--seed", str(seed)]
    manifest = {
        "subcommand": args.command,
        "argv": argv,
        "inputs": {p: _sha256(p) for p in inputs},
        "master_seed": seed,
        "iterations": len(derived),
        "derived_seeds": derived,
        "outputs": outputs,
        "version": __version__,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _fixed_graph(path):
    pg = load_description(path)
    if not pg.is_fixed:
        raise UsageError(f"{path} has random, optional or '?' elements; resolve it with `parcs randomize` first")
    return pg.to_graph().validate()


def _map(fn, items, jobs):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# --------------------------------------------------------------------------- commands


def cmd_validate(args, argv) -> int:
    pg = load_description(args.graph)
    if pg.is_fixed:
        g = pg.to_graph().validate()
        print(f"ok: {len(g.nodes)} nodes, {len(g.edges)} edges, order {' '.join(g.topo_order)}")
    else:
        print(f"ok: partial description with {len(pg.nodes)} nodes and {len(pg.edges)} edge declarations")
    return 0


def _parse_intervention(text):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise UsageError(f"--intervene expects NAME=VALUE, got {text!r}")
    try:
        return name.strip(), SetConstant(float(value))
    except ValueError:
        raise UsageError(f"--intervene value for {name.strip()} is not a number: {value!r}") from None


def cmd_sample(args, argv) -> int:
    seed, _ = _master_seed(args)
    graph = instantiate(_fixed_graph(args.graph), args.burn_in, seed)
    ivs = dict(_parse_intervention(t) for t in args.intervene)
    if ivs:
        graph = intervene(graph, ivs)
    if args.errors_in:
        batch = sample_with_errors(graph, read_csv(args.errors_in))
    else:
        batch = sample(graph, args.n, seed=seed)
    names = graph.names
    write_frame(args.out, batch.to_frame()[names])
    outputs = [args.out]
    if args.errors_out:
        write_frame(args.errors_out, batch.errors_frame()[names])
        outputs.append(args.errors_out)
    if args.manifest:
        inputs = [args.graph] + ([args.errors_in] if args.errors_in else [])
        _write_manifest(args.manifest, argv, args, seed, [], inputs, outputs)
    return 0


def cmd_randomize(args, argv) -> int:
    seed, _ = _master_seed(args)
    pg = load_description(args.partial)
    g = load_guideline(args.guideline)
    os.makedirs(args.outdir, exist_ok=True)
    seeds = [derive_seed(seed, i) for i in range(args.iterations)]

    def run(i):
        graph, trace = randomize(pg, g, seeds[i])
        stem = os.path.join(args.outdir, f"graph_{i:04d}")
        with open(stem + ".pdl", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize(graph))
        with open(stem + ".trace.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(trace.to_json() + "\n")
        return [stem + ".pdl", stem + ".trace.json"]

    outputs = [p for ps in _map(run, range(args.iterations), args.jobs) for p in ps]
    manifest = args.manifest or os.path.join(args.outdir, "manifest.json")
    _write_manifest(manifest, argv, args, seed, seeds, [args.partial, args.guideline], outputs)
    return 0


def cmd_missing(args, argv) -> int:
    if not 0.0 < args.ratio < 1.0:
        raise InvalidRange(f"--ratio must lie in (0, 1), got {args.ratio}")
    seed, _ = _master_seed(args)
    g = load_guideline(args.guideline) if args.guideline else Guideline()
    if args.sparsity is not None:
        g = replace(g, sparsity=(args.sparsity, args.sparsity))
    observed = tuple(s for s in (args.observed or "").split(",") if s)
    mech = Mechanism(args.mechanism, observed, args.rr_density)
    if args.source.endswith(".pdl"):
        z_source = instantiate(_fixed_graph(args.source), DEFAULT_BURN_IN, seed)
        exo, n = None, args.n
    else:
        frame = read_csv(args.source)
        z_source = frame
        exo = {str(c): frame[c].to_numpy(dtype=float) for c in frame.columns}
        n = len(frame)
    os.makedirs(args.outdir, exist_ok=True)
    seeds = [derive_seed(seed, i) for i in range(args.iterations)]

    def run(i):
        graph, trace = build_mgraph(z_source, mech, g, args.ratio, seeds[i], args.burn_in, return_trace=True)
        ds = sample_masked(graph, n, seed=derive_seed(seeds[i], 2), exogenous=exo)
        stem = os.path.join(args.outdir, f"iter_{i:04d}")
        meta = {"mechanism": mech.tag, "ratio": args.ratio, "trace_seed": trace.seed}
        files = write_masked(ds, stem + ".csv", meta)
        with open(stem + ".pdl", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize(graph))
        with open(stem + ".trace.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(trace.to_json() + "\n")
        return files + [stem + ".pdl", stem + ".trace.json"]

    outputs = [p for ps in _map(run, range(args.iterations), args.jobs) for p in ps]
    inputs = [args.source] + ([args.guideline] if args.guideline else [])
    manifest = args.manifest or os.path.join(args.outdir, "manifest.json")
    _write_manifest(manifest, argv, args, seed, seeds, inputs, outputs)
    return 0


def cmd_lingam(args, argv) -> int:
    if args.p < 2:
        raise InvalidRange(f"--p must be at least 2, got {args.p}")
    phi = args.phi if args.phi == "random" else float(args.phi)
    seed, _ = _master_seed(args)
    os.makedirs(args.outdir, exist_ok=True)
    seeds = [derive_seed(seed, i) for i in range(args.datasets)]
    corr = args.edge_correction == "on"

    def run(i):
        graph = lingam_preset(args.p, args.weight_range, seeds[i], phi, corr)
        if corr:
            graph = instantiate(graph, args.burn_in, derive_seed(seeds[i], 1))
        batch = sample(graph, args.n, seed=derive_seed(seeds[i], 2))
        d = os.path.join(args.outdir, f"dataset_{i:04d}")
        os.makedirs(d, exist_ok=True)
        names = graph.names
        write_frame(os.path.join(d, "data.csv"), batch.to_frame()[names])
        write_csv(os.path.join(d, "B.csv"), names, adjacency_matrix(graph))
        with open(os.path.join(d, "order.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(" ".join(causal_order(graph)) + "\n")
        with open(os.path.join(d, "graph.pdl"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(serialize(graph))
        return [os.path.join(d, f) for f in ("data.csv", "B.csv", "order.txt", "graph.pdl")]

    outputs = [p for ps in _map(run, range(args.datasets), args.jobs) for p in ps]
    manifest = args.manifest or os.path.join(args.outdir, "manifest.json")
    _write_manifest(manifest, argv, args, seed, seeds, [], outputs)
    return 0


def cmd_rerun(args, argv) -> int:
    with open(args.manifest_file, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
            old = manifest["argv"]
        except (ValueError, KeyError, TypeError):
            raise UsageError(f"{args.manifest_file} is not a run manifest") from None
    if manifest.get("version") != __version__:
        print(f"warning: manifest written by version {manifest.get('version')}, running {__version__}", file=sys.stderr)
    return main(old)


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parcs", description="Partially randomized causal data generator.")
    ap.add_argument("--version", action="version", version=f"parcs {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def seeded(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (default: $PARCS_SEED, else random)")
        p.add_argument("--manifest", default=None, help="where to write the run manifest")

    def fanout(p):
        p.add_argument("--iterations", "-N", type=int, default=DEFAULT_ITERATIONS)
        p.add_argument("--jobs", type=int, default=1, help="iterations run concurrently")

    p = sub.add_parser("validate", help="check a .pdl description")
    p.add_argument("graph")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="sample a fully specified graph to CSV")
    p.add_argument("graph")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--intervene", action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--errors-out", default=None)
    p.add_argument("--errors-in", default=None, help="reuse a stored error matrix instead of drawing one")
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    seeded(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("randomize", help="resolve a partial description N times")
    p.add_argument("partial")
    p.add_argument("guideline")
    p.add_argument("--outdir", "-o", required=True)
    fanout(p)
    seeded(p)
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("missing", help="generate masked datasets through m-graphs")
    p.add_argument("source", help="dataset .csv or fixed graph .pdl")
    p.add_argument("--mechanism", required=True, choices=["mcar", "mar", "mnar", "sc", "nsc", "mar+mcar"])
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--sparsity", type=float, default=None, help="overrides the guideline sparsity")
    p.add_argument("--observed", default=None, help="comma separated fully observed columns (mar)")
    p.add_argument("--rr-density", type=float, default=0.0)
    p.add_argument("--guideline", default=None)
    p.add_argument("-n", type=int, default=10_000, help="rows per dataset when the source is a graph")
    p.add_argument("--burn-in", type=int, default=MGRAPH_BURN_IN)
    p.add_argument("--outdir", "-o", required=True)
    fanout(p)
    seeded(p)
    p.set_defaults(func=cmd_missing)

    p = sub.add_parser("lingam", help="LiNGAM benchmark datasets with true B matrices")
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--weight-range", default="[-2,-0.5] U [0.5,2]")
    p.add_argument("--phi", default="1.0", help="power exponent, or 'random' for U[0.75, 1.25]")
    p.add_argument("--edge-correction", choices=["on", "off"], default="off")
    p.add_argument("--datasets", type=int, default=500)
    p.add_argument("-n", "--n", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=DEFAULT_BURN_IN)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--outdir", "-o", required=True)
    seeded(p)
    p.set_defaults(func=cmd_lingam)

    p = sub.add_parser("rerun", help="repeat a run from its manifest")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_rerun)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except ParcsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
