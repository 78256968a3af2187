"""Command-line front end: preserve, generate, verify, dsn, oracle.

Exit codes: 0 success (and verified), 1 verification failure, 2 input
error, 3 brute-force budget refusal.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .dsn import InfeasibleDemand, UdsnInstance, brute_force_udsn, solve_udsn
from .graph import (
    DemandSet,
    DirectedGraph,
    FormatError,
    Verdict,
    dump_demands,
    dump_graph,
    is_preserver,
    load_demands,
    load_graph,
)
from .instances import random_dag, random_demands
from .lowerbound import (
    LatticeParams,
    ParameterError,
    build_ce_base,
    build_layered_lowerbound,
    build_sv_lowerbound,
    default_params,
    layer_violations,
    verify_lowerbound,
)
from .preserver import AlgoConfig, BudgetExceeded, brute_force_opt, build_preserver
from .report import RunReport, digest_inputs

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

log = logging.getLogger("reachpres")


class InputError(Exception):
    pass


# ---- helpers ------------------------------------------------------------------

def _setup_logging() -> None:
    level = os.environ.get("PRESERVER_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "error"
    logging.basicConfig(level=levels[level], stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load_instance(graph_path: str, demand_path: str) -> tuple[DirectedGraph, DemandSet, list[bytes]]:
    gb, db = _read(graph_path), _read(demand_path)
    try:
        g = load_graph(gb.decode())
        d = load_demands(db.decode(), g.node_count)
    except FormatError as exc:
        raise InputError(str(exc)) from None
    return g, d, [gb, db]


def _load_edge_list(path: str, m: int) -> tuple[list[int], bytes]:
    blob = _read(path)
    ids = []
    for lineno, raw in enumerate(blob.decode().splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            e = int(body)
        except ValueError:
            raise InputError(f"line {lineno}: not an edge id: {body!r}") from None
        if not 0 <= e < m:
            raise InputError(f"line {lineno}: edge id {e} out of range")
        ids.append(e)
    return ids, blob


def _edge_text(edges) -> str:
    return "".join(f"{e}\n" for e in sorted(edges))


def _emit(args: argparse.Namespace, edges, report: RunReport) -> None:
    text = report.render(args.format)
    if edges is not None:
        if args.output:
            Path(args.output).write_text(_edge_text(edges))
        else:
            sys.stdout.write(_edge_text(edges))
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)


def _sizes(report: RunReport, g: DirectedGraph, d: DemandSet) -> None:
    report.sizes.update(n=g.node_count, m=g.edge_count, p=len(d.pairs), s=d.source_count())


def _check_chunk(args) -> tuple[int, tuple[int, int] | None]:
    g, kept, pairs, offset = args
    verdict = is_preserver(g, kept, DemandSet(pairs))
    if verdict.ok:
        return -1, None
    return offset + pairs.index(verdict.violation), verdict.violation


def _verify(g: DirectedGraph, kept, d: DemandSet, workers: int):
    """is_preserver, optionally fanned out over demand chunks."""
    if workers <= 1 or len(d.pairs) < 2 * workers:
        return is_preserver(g, kept, d)
    pairs = list(d.pairs)
    step = -(-len(pairs) // workers)
    chunks = [(g, sorted(kept), pairs[i:i + step], i) for i in range(0, len(pairs), step)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        found = [r for r in pool.map(_check_chunk, chunks) if r[1] is not None]
    if not found:
        return Verdict(True, None)
    _, violation = min(found)
    return Verdict(False, violation)


# ---- commands -----------------------------------------------------------------

def cmd_preserve(args: argparse.Namespace) -> int:
    g, d, blobs = _load_instance(args.graph, args.demands)
    report = RunReport("preserve", digest_inputs(blobs), args.seed)
    _sizes(report, g, d)
    cfg = AlgoConfig(
        universes_per_round=args.universes,
        seed=args.seed,
        target_factor=Fraction(args.target_factor),
        bound=args.bound,
        polish=not args.no_polish,
    )
    with report.timed("build"):
        res = build_preserver(g, d, cfg)
    with report.timed("verify"):
        verdict = _verify(g, res.kept_edges, d, args.workers)
    report.counters.update(work_scanned=res.work_scanned, rounds=res.rounds, retries=res.resample_retries)
    report.sizes.update(kept=len(res.kept_edges), bound_f=res.bound_used.f)
    report.verdicts["is_preserver"] = verdict.ok
    if not verdict.ok:
        report.verdicts["violation"] = list(verdict.violation)
    report.details.update(
        bound_kind=res.bound_used.kind,
        universes=res.universes,
        condensed_nodes=res.condensed_nodes,
        condensed_edges=res.condensed_edges,
        condensed_kept=res.condensed_kept,
        bound_phase_kept=res.bound_phase_kept,
        skeleton_size=res.skeleton_size,
        fallback_scans=res.fallback_scans,
        target_factor=str(cfg.target_factor),
        polish=cfg.polish,
        workers=args.workers,
    )
    _emit(args, res.kept_edges, report)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_verify(args: argparse.Namespace) -> int:
    g, d, blobs = _load_instance(args.graph, args.demands)
    kept, blob = _load_edge_list(args.preserver, g.edge_count)
    report = RunReport("verify", digest_inputs(blobs + [blob]), args.seed)
    _sizes(report, g, d)
    report.sizes["kept"] = len(set(kept))
    with report.timed("verify"):
        verdict = _verify(g, kept, d, args.workers)
    report.verdicts["is_preserver"] = verdict.ok
    if not verdict.ok:
        report.verdicts["violation"] = list(verdict.violation)
    _emit(args, None, report)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_dsn(args: argparse.Namespace) -> int:
    g, d, blobs = _load_instance(args.graph, args.demands)
    report = RunReport("dsn", digest_inputs(blobs), args.seed)
    _sizes(report, g, d)
    try:
        inst = UdsnInstance(g, d, k=args.k, alpha=Fraction(args.alpha), seed=args.seed)
    except InfeasibleDemand as exc:
        raise InputError(str(exc)) from None
    with report.timed("solve"):
        sol = solve_udsn(inst, oracle_budget=args.budget)
    with report.timed("verify"):
        verdict = _verify(g, sol.kept_edges, d, args.workers)
    report.sizes["kept"] = len(sol.kept_edges)
    report.verdicts["is_preserver"] = verdict.ok
    report.details.update(sol.to_json())
    report.details.pop("kept_edges")
    _emit(args, sol.kept_edges, report)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def cmd_oracle(args: argparse.Namespace) -> int:
    g, d, blobs = _load_instance(args.graph, args.demands)
    report = RunReport("oracle", digest_inputs(blobs), args.seed)
    _sizes(report, g, d)
    budget = args.budget
    with report.timed("search"):
        if args.mode == "preserver":
            opt = brute_force_opt(g, d, 22 if budget is None else budget)
        else:
            try:
                inst = UdsnInstance(g, d, seed=args.seed)
            except InfeasibleDemand as exc:
                raise InputError(str(exc)) from None
            opt = brute_force_udsn(inst, 20 if budget is None else budget)
    verdict = is_preserver(g, opt, d)
    report.sizes["kept"] = len(opt)
    report.verdicts["is_preserver"] = verdict.ok
    report.details["mode"] = args.mode
    _emit(args, opt, report)
    return EXIT_OK if verdict.ok else EXIT_VERIFY


def _lattice_params(args: argparse.Namespace) -> LatticeParams:
    explicit = [args.h, args.w, args.hz, args.r]
    if any(x is not None for x in explicit):
        if any(x is None for x in explicit):
            raise InputError("explicit lattice parameters need all of --h --w --hz --r")
        skew = tuple(int(x) for x in args.skew.split(",")) if args.skew else (1, 0)
        if len(skew) != 2:
            raise InputError("--skew takes dx,dy")
        return LatticeParams(
            Fraction(args.h), Fraction(args.w), Fraction(args.hz), Fraction(args.r),
            skew, Fraction(args.phi_scale),
            path_constant=None if args.path_constant is None else Fraction(args.path_constant),
        )
    if args.n is None:
        raise InputError("sv-lattice needs --n or explicit --h --w --hz --r")
    return default_params(args.n, sparsest=args.sparsest, seed=args.seed, phi_scale=Fraction(args.phi_scale))


def cmd_generate(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = args.name or args.family
    report = RunReport("generate", digest_inputs([json.dumps(_gen_key(args), sort_keys=True).encode()]), args.seed)
    sidecar = None
    with report.timed("build"):
        if args.family == "random-dag":
            if args.n is None or args.m is None:
                raise InputError("random-dag needs --n and --m")
            g = random_dag(args.n, args.m, args.seed)
            d = random_demands(g, args.pairs, args.seed, sources=args.sources, declare_sources=args.sources is not None)
            sidecar = {"kind": "random-dag", "params": {"n": args.n, "m": args.m, "pairs": args.pairs, "sources": args.sources}}
            inst = None
        elif args.family == "sv-lattice":
            inst = build_sv_lowerbound(_lattice_params(args))
        else:
            if args.side is None or args.p is None:
                raise InputError(f"{args.family} needs --side and --p")
            inst = build_ce_base(args.side, args.p)
            if args.family == "layered":
                inst = build_layered_lowerbound(inst, 2 * inst.extras["common_length"])
    ok = True
    if inst is not None:
        g, d = inst.graph, inst.demands
        with report.timed("verify"):
            inst.check_canonical_paths()
            ver = verify_lowerbound(inst, args.exhaustive_limit, seed=args.seed)
        report.verdicts["uniqueness_violations"] = len(ver.uniqueness_violations)
        report.verdicts["unverified_pairs"] = len(ver.unverified)
        report.verdicts["canonical_fraction"] = ver.canonical_fraction
        if inst.kind == "layered":
            bad = layer_violations(inst)
            report.verdicts["layer_violations"] = len(bad)
            ok = not bad
        ok = ok and ver.sample_mismatches == 0
        sidecar = inst.sidecar(ver)
    report.sizes.update(n=g.node_count, m=g.edge_count, p=len(d.pairs), s=d.source_count())
    report.verdicts["ok"] = ok
    (out_dir / f"{name}.graph").write_text(dump_graph(g))
    (out_dir / f"{name}.demands").write_text(dump_demands(d))
    (out_dir / f"{name}.json").write_text(json.dumps(sidecar, indent=1, sort_keys=True) + "\n")
    report.details["files"] = [f"{name}.graph", f"{name}.demands", f"{name}.json"]
    _emit(args, None, report)
    return EXIT_OK if ok else EXIT_VERIFY


def _gen_key(args: argparse.Namespace) -> dict:
    keys = ("family", "n", "m", "pairs", "sources", "h", "w", "hz", "r", "skew", "phi_scale",
            "path_constant", "sparsest", "side", "p", "seed", "exhaustive_limit")
    return {k: getattr(args, k, None) for k in keys}


# ---- parser -------------------------------------------------------------------

def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=_positive, default=1)
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--report", help="write the run report here instead of stdout")
    common.add_argument("-o", "--output", help="write the edge list here instead of stdout")

    parser = argparse.ArgumentParser(prog="reachpres", description="Reachability preservers and friends.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preserve", parents=[common], help="build a reachability preserver")
    p.add_argument("graph")
    p.add_argument("demands")
    p.add_argument("--universes", type=_positive, default=None)
    p.add_argument("--target-factor", default="2")
    p.add_argument("--bound", choices=("auto", "sv", "pairwise"), default="auto")
    p.add_argument("--no-polish", action="store_true", help="stop at the size target instead of minimality")
    p.set_defaults(func=cmd_preserve)

    v = sub.add_parser("verify", parents=[common], help="check a preserver edge list")
    v.add_argument("graph")
    v.add_argument("demands")
    v.add_argument("preserver")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("dsn", parents=[common], help="approximate an unweighted Steiner network")
    d.add_argument("graph")
    d.add_argument("demands")
    d.add_argument("--alpha", default="3/45")
    d.add_argument("--k", type=_positive, default=None)
    d.add_argument("--budget", type=int, default=None, help="run the exact oracle when m <= budget")
    d.set_defaults(func=cmd_dsn)

    o = sub.add_parser("oracle", parents=[common], help="exact optimum by brute force")
    o.add_argument("graph")
    o.add_argument("demands")
    o.add_argument("--mode", choices=("preserver", "udsn"), default="preserver")
    o.add_argument("--budget", type=int, default=None)
    o.set_defaults(func=cmd_oracle)

    gen = sub.add_parser("generate", parents=[common], help="write an instance family to files")
    gen.add_argument("family", choices=("sv-lattice", "ce-base", "layered", "random-dag"))
    gen.add_argument("--out-dir", default=".")
    gen.add_argument("--name")
    gen.add_argument("--n", type=int)
    gen.add_argument("--m", type=int)
    gen.add_argument("--pairs", type=int, default=8)
    gen.add_argument("--sources", type=int)
    gen.add_argument("--h")
    gen.add_argument("--w")
    gen.add_argument("--hz")
    gen.add_argument("--r")
    gen.add_argument("--skew", help="long-axis direction dx,dy")
    gen.add_argument("--phi-scale", default="3/2")
    gen.add_argument("--path-constant")
    gen.add_argument("--sparsest", action="store_true")
    gen.add_argument("--side", type=int)
    gen.add_argument("--p", type=int)
    gen.add_argument("--exhaustive-limit", type=int, default=5000)
    gen.set_defaults(func=cmd_generate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ParameterError as exc:
        print(f"error: parameter constraint violated: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
