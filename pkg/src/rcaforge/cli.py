"""Command-line interface.

Subcommands mirror the pipeline: simulate, detect, discover, score,
evaluate, bench, serve.  Exit codes: 0 success, 1 validation/usage error,
2 internal error.  All randomness is controlled by --seed.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from . import benchmark, io, simulate
from .discovery import GesConfig, PcConfig, ges_discover, pc_discover
from .errors import RcaError
from .evaluation import graph_score
from .graphs import EMPTY_KNOWLEDGE
from .scoring import (
    ScoringContext,
    bayesian_scores,
    epsilon_diagnosis,
    ht_scores,
    random_walk_scores,
    rcd_scores,
)
from .stats import detect_anomalies


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rcaforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a ground-truth case bundle")
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--edges", type=int, default=30)
    p.add_argument("--normal", type=int, default=2000, help="normal-period rows")
    p.add_argument("--abnormal", type=int, default=500, help="abnormal-period rows")
    p.add_argument("--root-causes", type=int, default=None,
                   help="fixed root-cause count (default: 1-3 drawn per seed)")
    p.add_argument("--mechanism", choices=simulate.MECHANISMS, default="mean_shift")
    p.add_argument("--magnitude", type=float, default=10.0)
    p.add_argument("--noise", choices=simulate.NOISE_FORMS, default="gaussian")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("detect", help="flag anomalous spans per metric")
    p.add_argument("--input", required=True)
    p.add_argument("--k-sigma", type=float, default=3.0)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("discover", help="estimate a causal graph")
    p.add_argument("--input", required=True)
    p.add_argument("--knowledge", default=None)
    p.add_argument("--algo", choices=("pc", "ges"), default="pc")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--max-cond", type=int, default=3)
    p.add_argument("--max-parents", default="2",
                   help="per-node parent cap for ges; 'none' lifts it")
    p.add_argument("--out", required=True)

    p = sub.add_parser("score", help="rank candidate root causes")
    p.add_argument("--method", required=True,
                   choices=("rw", "ht", "ht-adj", "bi", "eps", "rcd", "rcd-local"))
    p.add_argument("--graph", default=None)
    p.add_argument("--normal", required=True)
    p.add_argument("--abnormal", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="compare an estimated graph against truth")
    p.add_argument("--est", required=True)
    p.add_argument("--truth", required=True)

    p = sub.add_parser("bench", help="run the simulation benchmark")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--nodes", type=int, default=20)
    p.add_argument("--edges", type=int, default=30)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--abnormal", type=int, default=200)
    p.add_argument("--methods", default="ht,ht-adj,bi,rw,eps,rcd,rcd-local")
    p.add_argument("--graphs", default="truth,pc,ges")
    p.add_argument("--magnitude", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=1, help="first case seed")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--case-dir", default=None, help="per-case cache for resumability")
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="start the HTTP job service")
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--data-dir", default=None)
    p.add_argument("--max-jobs", type=int, default=None)

    return parser


def _load_context(args) -> ScoringContext:
    normal = io.load_metrics(Path(args.normal))
    abnormal = io.load_metrics(Path(args.abnormal))
    graph = io.load_graph(args.graph) if args.graph else None
    return ScoringContext(normal=normal, abnormal=abnormal, graph=graph,
                          anomalous_metrics=frozenset(normal.names))


def _cmd_simulate(args) -> int:
    case = simulate.gen_case(
        num_nodes=args.nodes,
        num_edges=args.edges,
        n_normal=args.normal,
        n_abnormal=args.abnormal,
        n_root_causes=args.root_causes if args.root_causes else (1, 3),
        mechanism=args.mechanism,
        magnitude=args.magnitude,
        noise_form=args.noise,
        seed=args.seed,
    )
    simulate.write_case(case, args.out)
    print(f"case written to {args.out} (targets: {', '.join(sorted(case.truth))})")
    return 0


def _cmd_detect(args) -> int:
    frame = io.load_metrics(Path(args.input))
    spans = detect_anomalies(frame, train_fraction=args.train_fraction, k_sigma=args.k_sigma)
    doc = {
        name: [
            {"start_index": s.start_index, "end_index": s.end_index, "peak_score": s.peak_score}
            for s in span_list
        ]
        for name, span_list in spans.items()
    }
    text = io.to_canonical_json(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0


def _cmd_discover(args) -> int:
    frame = io.load_metrics(Path(args.input))
    knowledge = io.load_knowledge(args.knowledge) if args.knowledge else EMPTY_KNOWLEDGE
    if args.algo == "pc":
        graph = pc_discover(frame, knowledge, PcConfig(alpha=args.alpha, max_cond_size=args.max_cond))
    else:
        cap = None if str(args.max_parents).lower() == "none" else int(args.max_parents)
        graph = ges_discover(frame, knowledge, GesConfig(max_parents=cap))
    io.write_graph(graph, args.out)
    print(f"{args.algo} graph: {len(graph.directed)} directed, "
          f"{len(graph.undirected)} undirected edges -> {args.out}")
    return 0


def _cmd_score(args) -> int:
    ctx = _load_context(args)
    method = args.method
    if method == "rw":
        result = random_walk_scores(ctx, seed=args.seed)
    elif method == "ht":
        result = ht_scores(ctx, adjust=False)
    elif method == "ht-adj":
        result = ht_scores(ctx, adjust=True)
    elif method == "bi":
        result = bayesian_scores(ctx)
    elif method == "eps":
        result = epsilon_diagnosis(ctx, seed=args.seed)
    elif method == "rcd":
        result = rcd_scores(ctx, localized=False)
    else:
        result = rcd_scores(ctx, localized=True)
    io.write_result(result, args.out)
    top = ", ".join(f"{m} ({s:.3g})" for m, s in result.ranked[:3])
    print(f"{method}: top candidates: {top or '(empty ranking)'}")
    return 0


def _cmd_evaluate(args) -> int:
    est = io.load_graph(args.est)
    truth = io.load_graph(args.truth)
    gs = graph_score(est, truth)
    print(f"precision={gs.precision:.4f} recall={gs.recall:.4f} f1={gs.f1:.4f} shd={gs.shd}")
    return 0


def _cmd_bench(args) -> int:
    cfg = benchmark.BenchConfig(
        cases=args.cases,
        nodes=args.nodes,
        edges=args.edges,
        samples=args.samples,
        abnormal=args.abnormal,
        magnitude=args.magnitude,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        graphs=tuple(g.strip() for g in args.graphs.split(",") if g.strip()),
        seed_start=args.seed,
        workers=args.workers,
        case_dir=args.case_dir,
    )
    report = benchmark.run_benchmark(cfg)
    benchmark.write_report(report, args.out)
    print(report.markdown)
    print(f"report written to {args.out} "
          f"({report.cases} cases, {report.wall_time_s:.1f}s)", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    app = create_app(data_dir=args.data_dir, max_jobs=args.max_jobs)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="info")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "detect": _cmd_detect,
    "discover": _cmd_discover,
    "score": _cmd_score,
    "evaluate": _cmd_evaluate,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (RcaError, FileNotFoundError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def main() -> None:
    raise SystemExit(cli_main())
