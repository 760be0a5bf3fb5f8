"""Benchmark harness: simulate -> discover -> score -> aggregate.

Cases are independent units of work (one seed each) executed by a process
pool; the report aggregates Recall@k per scoring method and graph source,
plus graph-accuracy scores per discovery algorithm.  Reports are
deterministic: the canonical JSON excludes wall time, and aggregation
always folds cases in seed order.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .discovery import GesConfig, PcConfig, ges_discover, pc_discover
from .evaluation import graph_score, recall_at_k
from .graphs import MixedGraph, dag_to_cpdag
from .io import to_canonical_json
from .scoring import (
    RcaResult,
    ScoringContext,
    bayesian_scores,
    epsilon_diagnosis,
    ht_scores,
    random_walk_scores,
    rcd_scores,
)
from .simulate import Case, gen_case
from .stats import concat_frames, detect_anomalies, peak_scores

ONE_PHASE = ("eps", "rcd", "rcd-local")
TWO_PHASE = ("rw", "ht", "ht-adj", "bi")
ALL_METHODS = ONE_PHASE + TWO_PHASE
GRAPH_SOURCES = ("truth", "pc", "ges")
RECALL_KS = (1, 3, 5)


@dataclass(frozen=True)
class BenchConfig:
    cases: int = 50
    nodes: int = 20
    edges: int = 30
    samples: int = 2000
    abnormal: int = 200
    root_causes: tuple[int, int] = (1, 3)
    mechanism: str = "mean_shift"
    magnitude: float = 10.0
    noise_form: str = "gaussian"
    methods: tuple[str, ...] = ("ht", "ht-adj", "bi", "rw", "eps", "rcd", "rcd-local")
    graphs: tuple[str, ...] = ("truth", "pc", "ges")
    seed_start: int = 1
    alpha: float = 0.05
    max_cond_size: int = 3
    max_parents: int | None = 2
    workers: int | None = None
    case_dir: str | None = None

    def __post_init__(self):
        if self.cases < 1:
            raise ValueError("need at least one case")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if not self.methods:
            raise ValueError("need at least one scoring method")
        unknown = set(self.graphs) - set(GRAPH_SOURCES)
        if unknown:
            raise ValueError(f"unknown graph sources: {sorted(unknown)}")


@dataclass
class BenchReport:
    config: dict
    cases: int
    failed: list
    recall: dict  # key -> {"r1": {"mean","se"}, ...}
    graph_scores: dict  # algo -> {"precision": {"mean","se"}, ...}
    markdown: str
    wall_time_s: float


def _score_one(method: str, ctx: ScoringContext, seed: int) -> RcaResult:
    if method == "rw":
        return random_walk_scores(ctx, seed=seed)
    if method == "ht":
        return ht_scores(ctx, adjust=False)
    if method == "ht-adj":
        return ht_scores(ctx, adjust=True)
    if method == "bi":
        return bayesian_scores(ctx)
    if method == "eps":
        return epsilon_diagnosis(ctx, seed=seed)
    if method == "rcd":
        return rcd_scores(ctx, localized=False)
    if method == "rcd-local":
        return rcd_scores(ctx, localized=True)
    raise ValueError(f"unknown method {method!r}")


def _anomaly_view(case: Case) -> tuple[frozenset, dict]:
    """Anomalous metrics and detector peaks for the scoring context.

    Falls back to treating every metric as anomalous (peaks from an
    unthresholded pass) if nothing crosses the threshold.
    """
    both = concat_frames(case.normal, case.abnormal)
    frac = len(case.normal) / len(both)
    spans = detect_anomalies(both, train_fraction=frac, k_sigma=3.0)
    peaks = peak_scores(spans)
    anomalous = frozenset(n for n, s in spans.items() if s)
    if not anomalous:
        spans = detect_anomalies(both, train_fraction=frac, k_sigma=0.0)
        peaks = peak_scores(spans)
        anomalous = frozenset(case.normal.names)
    return anomalous, peaks


def run_case(cfg: BenchConfig, seed: int) -> dict:
    """One benchmark case; returns a JSON-serializable record."""
    case = gen_case(
        num_nodes=cfg.nodes,
        num_edges=cfg.edges,
        n_normal=cfg.samples,
        n_abnormal=cfg.abnormal,
        n_root_causes=cfg.root_causes,
        mechanism=cfg.mechanism,
        magnitude=cfg.magnitude,
        noise_form=cfg.noise_form,
        seed=seed,
    )
    anomalous, peaks = _anomaly_view(case)
    truth_cpdag = dag_to_cpdag(case.scm.graph)

    graphs: dict[str, MixedGraph] = {}
    graph_scores: dict[str, dict] = {}
    for source in cfg.graphs:
        if source == "truth":
            graphs[source] = case.scm.graph
            continue
        if source == "pc":
            est = pc_discover(
                case.normal,
                config=PcConfig(alpha=cfg.alpha, max_cond_size=cfg.max_cond_size),
            )
        else:
            est = ges_discover(case.normal, config=GesConfig(max_parents=cfg.max_parents))
        graphs[source] = est
        gs = graph_score(est, truth_cpdag)
        graph_scores[source] = {
            "precision": gs.precision,
            "recall": gs.recall,
            "f1": gs.f1,
            "shd": gs.shd,
        }

    recalls: dict[str, dict] = {}
    for method in cfg.methods:
        if method in ONE_PHASE:
            ctx = ScoringContext(
                normal=case.normal,
                abnormal=case.abnormal,
                graph=None,
                anomalous_metrics=anomalous,
                peaks=peaks,
            )
            result = _score_one(method, ctx, seed)
            recalls[method] = {
                f"r{k}": recall_at_k(list(result.ranked), set(case.truth), k)
                for k in RECALL_KS
            }
        else:
            for source in cfg.graphs:
                ctx = ScoringContext(
                    normal=case.normal,
                    abnormal=case.abnormal,
                    graph=graphs[source],
                    anomalous_metrics=anomalous,
                    peaks=peaks,
                )
                result = _score_one(method, ctx, seed)
                recalls[f"{method}@{source}"] = {
                    f"r{k}": recall_at_k(list(result.ranked), set(case.truth), k)
                    for k in RECALL_KS
                }
    return {
        "seed": seed,
        "targets": sorted(case.truth),
        "recalls": recalls,
        "graph_scores": graph_scores,
    }


def _case_with_guard(args) -> dict:
    cfg, seed = args
    try:
        return run_case(cfg, seed)
    except Exception as exc:  # recorded, not fatal
        return {"seed": seed, "error": f"{type(exc).__name__}: {exc}"}


def _mean_se(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
    return {"mean": mean, "se": se}


def _fmt(cell: dict, digits: int = 2) -> str:
    return f"{cell['mean']:.{digits}f} ± {cell['se']:.{digits}f}"


def _render_markdown(cfg: BenchConfig, recall: dict, graph_scores: dict, n_cases: int) -> str:
    lines = [
        f"Benchmark over {n_cases} cases "
        f"({cfg.nodes} nodes, {cfg.edges} edges, {cfg.samples}+{cfg.abnormal} samples); "
        "intervals are standard errors.",
        "",
        "| Method | Graph | Recall@1 | Recall@3 | Recall@5 |",
        "| --- | --- | --- | --- | --- |",
    ]
    for key in recall:
        method, _, source = key.partition("@")
        row = recall[key]
        lines.append(
            f"| {method} | {source or '-'} | "
            f"{_fmt(row['r1'])} | {_fmt(row['r3'])} | {_fmt(row['r5'])} |"
        )
    if graph_scores:
        lines += [
            "",
            "| Algorithm | Precision | Recall | F1 | SHD |",
            "| --- | --- | --- | --- | --- |",
        ]
        for algo, row in graph_scores.items():
            lines.append(
                f"| {algo} | {_fmt(row['precision'])} | {_fmt(row['recall'])} | "
                f"{_fmt(row['f1'])} | {_fmt(row['shd'])} |"
            )
    return "\n".join(lines) + "\n"


def run_benchmark(cfg: BenchConfig) -> BenchReport:
    """Generate, score, and aggregate ``cfg.cases`` seeded cases."""
    start = time.perf_counter()
    seeds = list(range(cfg.seed_start, cfg.seed_start + cfg.cases))

    cache_dir = Path(cfg.case_dir) if cfg.case_dir else None
    records: dict[int, dict] = {}
    todo: list[int] = []
    if cache_dir:
        cache_dir.mkdir(parents=True, exist_ok=True)
        for seed in seeds:
            path = cache_dir / f"case_{seed}.json"
            if path.exists():
                records[seed] = json.loads(path.read_text())
            else:
                todo.append(seed)
    else:
        todo = seeds

    if todo:
        if cfg.workers and cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                fresh = list(pool.map(_case_with_guard, [(cfg, s) for s in todo]))
        else:
            fresh = [_case_with_guard((cfg, s)) for s in todo]
        for record in fresh:
            records[record["seed"]] = record
            if cache_dir:
                (cache_dir / f"case_{record['seed']}.json").write_text(
                    to_canonical_json(record)
                )

    ordered = [records[s] for s in seeds]
    good = [r for r in ordered if "error" not in r]
    failed = [{"seed": r["seed"], "error": r["error"]} for r in ordered if "error" in r]

    recall: dict[str, dict] = {}
    keys: list[str] = []
    for method in cfg.methods:
        if method in ONE_PHASE:
            keys.append(method)
        else:
            keys.extend(f"{method}@{source}" for source in cfg.graphs)
    for key in keys:
        per_k = {}
        for k in RECALL_KS:
            values = [r["recalls"][key][f"r{k}"] for r in good]
            per_k[f"r{k}"] = _mean_se(values) if values else {"mean": 0.0, "se": 0.0}
        recall[key] = per_k

    graph_scores: dict[str, dict] = {}
    for source in cfg.graphs:
        if source == "truth":
            continue
        rows = [r["graph_scores"][source] for r in good if source in r.get("graph_scores", {})]
        if not rows:
            continue
        graph_scores[source] = {
            metric: _mean_se([row[metric] for row in rows])
            for metric in ("precision", "recall", "f1", "shd")
        }

    markdown = _render_markdown(cfg, recall, graph_scores, len(good))
    return BenchReport(
        config=asdict(cfg),
        cases=len(good),
        failed=failed,
        recall=recall,
        graph_scores=graph_scores,
        markdown=markdown,
        wall_time_s=time.perf_counter() - start,
    )


def report_to_json(report: BenchReport) -> str:
    """Canonical report JSON; wall time is excluded so bytes reproduce."""
    doc = {
        "config": report.config,
        "cases": report.cases,
        "failed": report.failed,
        "interval": "standard_error",
        "recall": report.recall,
        "graph_scores": report.graph_scores,
        "markdown": report.markdown,
    }
    return to_canonical_json(doc)


def write_report(report: BenchReport, path) -> None:
    Path(path).write_text(report_to_json(report))
