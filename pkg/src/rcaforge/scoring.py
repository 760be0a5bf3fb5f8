"""Root-cause ranking: five scorers emitting a unified RcaResult.

Two-phase scorers (random walk, hypothesis testing, Bayesian surprise)
consume a causal graph plus normal/abnormal frames; one-phase scorers
(energy-distance diagnosis, indicator-variable neighbor search) ignore the
graph entirely and work from the two frames alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import CycleError, GraphRequired, InsufficientData
from .graphs import MixedGraph, descendants, extend_to_dag, force_dag, topological_sort
from .stats import (
    MetricFrame,
    chi_square_ci,
    concat_frames,
    detect_anomalies,
    discretize,
    energy_distance,
    peak_scores,
    permutation_pvalue,
)

SIGMA_FLOOR = 1e-9
NO_SIGNAL_THRESHOLD = 3.0  # max standardized residual below this = "no signal"


@dataclass(frozen=True)
class RcaResult:
    """Ranked root-cause candidates with method-specific metadata."""

    ranked: tuple
    method: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        ranked = tuple((str(m), float(s)) for m, s in self.ranked)
        names = [m for m, _ in ranked]
        if len(set(names)) != len(names):
            raise ValueError("metric appears more than once in ranking")
        scores = [s for _, s in ranked]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("scores must be non-increasing")
        object.__setattr__(self, "ranked", ranked)

    def top(self, k: int) -> list[str]:
        return [m for m, _ in self.ranked[:k]]

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "ranked": [{"metric": m, "score": s} for m, s in self.ranked],
            "metadata": self.metadata,
        }


@dataclass(frozen=True)
class ScoringContext:
    """Inputs shared by every scorer.

    ``peaks`` (detector peak score per metric) is optional; scorers that
    need it fall back to running the stats-threshold detector on the
    concatenated frames.
    """

    normal: MetricFrame
    abnormal: MetricFrame
    graph: MixedGraph | None = None
    anomalous_metrics: frozenset = frozenset()
    peaks: dict | None = None

    def __post_init__(self):
        if set(self.normal.names) != set(self.abnormal.names):
            raise ValueError("normal and abnormal frames must share columns")
        object.__setattr__(self, "anomalous_metrics", frozenset(self.anomalous_metrics))
        unknown = self.anomalous_metrics - set(self.normal.names)
        if unknown:
            raise ValueError(f"anomalous metrics not in frames: {sorted(unknown)}")


def _rank(scores: dict[str, float], method: str, metadata: dict) -> RcaResult:
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return RcaResult(ranked=tuple(ordered), method=method, metadata=metadata)


def _require_dag(ctx: ScoringContext, method: str) -> MixedGraph:
    """The context graph as a DAG, via the deterministic CPDAG extension.

    Estimated graphs occasionally carry directed cycles (conflicting
    finite-sample orientations); those are repaired by force_dag rather
    than failing the scorer.
    """
    if ctx.graph is None:
        raise GraphRequired(f"{method} needs a causal graph")
    try:
        if ctx.graph.undirected:
            return extend_to_dag(ctx.graph)
        topological_sort(ctx.graph)
        return ctx.graph
    except CycleError:
        return force_dag(ctx.graph)


def _detector_peaks(ctx: ScoringContext) -> dict[str, float]:
    if ctx.peaks is not None:
        return dict(ctx.peaks)
    both = concat_frames(ctx.normal, ctx.abnormal)
    frac = len(ctx.normal) / len(both)
    return peak_scores(detect_anomalies(both, train_fraction=frac))


def _fit_linear_models(dag: MixedGraph, normal: MetricFrame):
    """Per-node least squares on the normal frame: (parents, coef, sigma)."""
    models = {}
    n = len(normal)
    for v in dag.nodes:
        parents = tuple(sorted(dag.parents(v)))
        y = normal.values(v)
        design = np.column_stack([np.ones(n)] + [normal.values(p) for p in parents])
        coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        resid = y - design @ coef
        sigma = max(float(resid.std()), SIGMA_FLOOR)
        models[v] = (parents, coef, sigma)
    return models


def _residuals(models, frame: MetricFrame, v: str) -> np.ndarray:
    parents, coef, _ = models[v]
    n = len(frame)
    design = np.column_stack([np.ones(n)] + [frame.values(p) for p in parents])
    return frame.values(v) - design @ coef


# ---------------------------------------------------------------------------
# random walk
# ---------------------------------------------------------------------------


def build_transition_matrix(
    dag: MixedGraph,
    affinity: dict[str, float],
    rho: float = 0.1,
    self_weight: float = 0.5,
) -> np.ndarray:
    """Row-stochastic walk matrix from forward/backward/self weights.

    From node i: weight c(p) toward each parent p, rho * c(ch) toward each
    child, and self_weight * max(0, c(i) - max neighbor affinity) for
    staying.  All-zero rows become uniform.
    """
    nodes = dag.nodes
    index = {v: i for i, v in enumerate(nodes)}
    m = np.zeros((len(nodes), len(nodes)))
    for v in nodes:
        i = index[v]
        parents = sorted(dag.parents(v))
        children = sorted(dag.children(v))
        for p in parents:
            m[i, index[p]] += affinity[p]
        for c in children:
            m[i, index[c]] += rho * affinity[c]
        neighbor_best = max((affinity[u] for u in parents + children), default=0.0)
        m[i, i] += self_weight * max(0.0, affinity[v] - neighbor_best)
    sums = m.sum(axis=1, keepdims=True)
    zero = sums[:, 0] == 0.0
    m[zero] = 1.0 / len(nodes)
    sums[zero] = 1.0
    return m / sums


def random_walk_scores(
    ctx: ScoringContext,
    rho: float = 0.1,
    self_weight: float = 0.5,
    steps: int = 50000,
    seed: int = 0,
) -> RcaResult:
    """Correlation-guided random walk started at the strongest anomaly.

    Node affinity is |corr(node, anchor)| over the concatenated frames; the
    walk runs ``steps`` transitions and nodes are ranked by visit
    frequency.
    """
    dag = _require_dag(ctx, "random_walk_scores")
    if not ctx.anomalous_metrics:
        raise ValueError("random_walk_scores needs at least one anomalous metric")
    peaks = _detector_peaks(ctx)
    anchor = min(ctx.anomalous_metrics, key=lambda v: (-peaks.get(v, 0.0), v))
    both = concat_frames(ctx.normal, ctx.abnormal)
    anchor_values = both.values(anchor)
    affinity = {}
    for v in dag.nodes:
        col = both.values(v)
        if col.std() == 0.0 or anchor_values.std() == 0.0:
            affinity[v] = 0.0
        else:
            affinity[v] = abs(float(np.corrcoef(col, anchor_values)[0, 1]))
    matrix = build_transition_matrix(dag, affinity, rho=rho, self_weight=self_weight)

    index = {v: i for i, v in enumerate(dag.nodes)}
    cdf = np.cumsum(matrix, axis=1)
    rng = np.random.default_rng(seed)
    draws = rng.random(steps)
    visits = np.zeros(len(dag.nodes), dtype=np.int64)
    pos = index[anchor]
    for t in range(steps):
        pos = int(np.searchsorted(cdf[pos], draws[t], side="right"))
        visits[pos] += 1
    scores = {v: visits[index[v]] / steps for v in dag.nodes}
    metadata = {
        "anchor": anchor,
        "visits": {v: int(visits[index[v]]) for v in dag.nodes},
        "affinity": affinity,
    }
    return _rank(scores, "rw", metadata)


# ---------------------------------------------------------------------------
# hypothesis testing
# ---------------------------------------------------------------------------


def ht_scores(ctx: ScoringContext, adjust: bool = False, lam: float = 0.5) -> RcaResult:
    """Intervention detection via standardized regression residuals.

    Each node is regressed on its graph parents over the normal frame; the
    score is the largest |residual| / sigma across abnormal rows.  With
    ``adjust``, a node's score is raised by ``lam`` times the best base
    score among its descendants, boosting upstream candidates with large
    downstream effects.
    """
    dag = _require_dag(ctx, "ht_scores")
    models = _fit_linear_models(dag, ctx.normal)
    base = {}
    for v in dag.nodes:
        resid = _residuals(models, ctx.abnormal, v)
        base[v] = float(np.abs(resid).max() / models[v][2])
    scores = dict(base)
    if adjust:
        for v in dag.nodes:
            down = descendants(dag, v)
            if down:
                scores[v] = base[v] + lam * max(base[d] for d in down)
    metadata = {
        "base_scores": base,
        "adjusted": adjust,
        "lambda": lam if adjust else None,
        "no_signal": max(base.values()) < NO_SIGNAL_THRESHOLD,
        "extended_from_cpdag": bool(ctx.graph.undirected),
    }
    return _rank(scores, "ht-adj" if adjust else "ht", metadata)


# ---------------------------------------------------------------------------
# Bayesian surprise
# ---------------------------------------------------------------------------


def bayesian_scores(ctx: ScoringContext) -> RcaResult:
    """Excess Gaussian surprise under the SCM fitted to normal data.

    Per-node linear models are estimated on the normal frame and combined
    into the implied joint Gaussian; each metric's score is the mean
    negative log-density of its observed abnormal values under its implied
    marginal, minus the same average over the normal frame.  Nodes whose
    marginal distribution is untouched by the incident score near zero.
    """
    dag = _require_dag(ctx, "bayesian_scores")
    models = _fit_linear_models(dag, ctx.normal)
    nodes = dag.nodes
    index = {v: i for i, v in enumerate(nodes)}
    p = len(nodes)
    weight = np.zeros((p, p))  # weight[child, parent]
    intercept = np.zeros(p)
    noise_var = np.zeros(p)
    for v in nodes:
        parents, coef, sigma = models[v]
        intercept[index[v]] = coef[0]
        noise_var[index[v]] = sigma**2
        for j, par in enumerate(parents):
            weight[index[v], index[par]] = coef[j + 1]
    inv = np.linalg.inv(np.eye(p) - weight)
    mu = inv @ intercept
    cov = inv @ np.diag(noise_var) @ inv.T
    var = np.maximum(np.diag(cov), SIGMA_FLOOR**2)

    scores = {}
    for v in nodes:
        i = index[v]
        sq_ab = float(np.mean((ctx.abnormal.values(v) - mu[i]) ** 2))
        sq_no = float(np.mean((ctx.normal.values(v) - mu[i]) ** 2))
        scores[v] = (sq_ab - sq_no) / (2.0 * var[i])
    metadata = {
        "marginal_mean": {v: float(mu[index[v]]) for v in nodes},
        "marginal_var": {v: float(var[index[v]]) for v in nodes},
        "extended_from_cpdag": bool(ctx.graph.undirected),
    }
    return _rank(scores, "bi", metadata)


# ---------------------------------------------------------------------------
# energy-distance diagnosis
# ---------------------------------------------------------------------------


def epsilon_diagnosis(
    ctx: ScoringContext,
    permutations: int = 199,
    alpha: float = 0.05,
    seed: int = 0,
    window: int | None = None,
) -> RcaResult:
    """Two-sample energy-distance test per metric, permutation calibrated.

    Significant metrics (p <= alpha) rank first, ordered by energy distance
    descending; the rest follow by p ascending.  Scores are 1 - p, clamped
    to stay non-increasing along the ranking when the epsilon ordering and
    the p ordering disagree inside the significant group.
    """
    w = min(len(ctx.normal), len(ctx.abnormal))
    if window is not None:
        if window < 2:
            raise ValueError("window must be >= 2")
        w = min(window, w)
    eps: dict[str, float] = {}
    pvals: dict[str, float] = {}
    for i, name in enumerate(sorted(ctx.normal.names)):
        a = ctx.normal.values(name)[-w:]
        b = ctx.abnormal.values(name)[-w:]
        eps[name] = energy_distance(a, b)
        pvals[name] = permutation_pvalue(
            a, b, energy_distance, permutations=permutations, seed=seed + i
        )
    significant = sorted(
        (n for n in eps if pvals[n] <= alpha), key=lambda n: (-eps[n], n)
    )
    rest = sorted((n for n in eps if pvals[n] > alpha), key=lambda n: (pvals[n], n))
    ranked = []
    floor = 1.0
    clamped = False
    for name in significant + rest:
        score = 1.0 - pvals[name]
        if score > floor:
            score = floor
            clamped = True
        floor = score
        ranked.append((name, score))
    metadata = {
        "epsilon": eps,
        "p_values": pvals,
        "window": w,
        "alpha": alpha,
        "significant": significant,
        "score_clamped": clamped,
    }
    return RcaResult(ranked=tuple(ranked), method="eps", metadata=metadata)


# ---------------------------------------------------------------------------
# indicator-variable neighbor search
# ---------------------------------------------------------------------------

_FAILURE = "__failure__"


def _indicator_filter(tester, candidates: list[str], max_level: int, alpha: float):
    """Remove candidates rendered independent of the failure indicator.

    Returns (survivors, weakest p seen per survivor, dropped-with-reason).
    Candidate snapshots per level keep the scan order-independent.
    """
    alive = list(candidates)
    worst_p: dict[str, float] = {}
    dropped: dict[str, str] = {}
    for level in range(max_level + 1):
        snapshot = list(alive)
        for x in snapshot:
            if x not in alive:
                continue
            pool = [c for c in snapshot if c != x and c in alive]
            separated = False
            for z in combinations(pool, level):
                try:
                    p = tester(x, z)
                except InsufficientData:
                    dropped[x] = "insufficient data"
                    alive.remove(x)
                    separated = True
                    break
                worst_p[x] = max(worst_p.get(x, 0.0), p)
                if p > alpha:
                    alive.remove(x)
                    separated = True
                    break
            if separated:
                continue
    return alive, worst_p, dropped


def rcd_scores(
    ctx: ScoringContext,
    bins: int = 3,
    alpha: float = 0.05,
    localized: bool = False,
    chunk_size: int = 10,
) -> RcaResult:
    """Failure-indicator neighbor search on discretized data.

    All metrics are discretized into equal-frequency bins (edges from the
    normal frame), stacked with a 0/1 failure indicator, and a candidate
    metric survives only if no conditioning set of size <= 2 renders it
    independent of the indicator.  The localized variant first filters
    within chunks (conditioning size <= 1) and then reruns the full search
    on the union of chunk survivors.
    """
    names = list(ctx.normal.names)
    codes: dict[str, np.ndarray] = {}
    for name in names:
        ref = ctx.normal.values(name)
        codes[name] = discretize(
            np.concatenate([ref, ctx.abnormal.values(name)]), ref, bins=bins
        )
    indicator = np.concatenate(
        [np.zeros(len(ctx.normal), dtype=np.int64), np.ones(len(ctx.abnormal), dtype=np.int64)]
    )
    stacked = MetricFrame(
        np.arange(len(indicator), dtype=np.int64),
        {**{n: codes[n].astype(float) for n in names}, _FAILURE: indicator.astype(float)},
    )

    def tester(x: str, z: tuple[str, ...]) -> float:
        return chi_square_ci(stacked, _FAILURE, x, z).p_value

    if localized:
        union: list[str] = []
        for start in range(0, len(names), chunk_size):
            chunk = names[start : start + chunk_size]
            survivors, _, _ = _indicator_filter(tester, chunk, 1, alpha)
            union.extend(survivors)
        alive, worst_p, dropped = _indicator_filter(tester, union, 2, alpha)
        method = "rcd-local"
    else:
        alive, worst_p, dropped = _indicator_filter(tester, names, 2, alpha)
        method = "rcd"

    ordered = sorted(alive, key=lambda n: (worst_p.get(n, 1.0), n))
    ranked = tuple((n, 1.0 - worst_p.get(n, 1.0)) for n in ordered)
    metadata = {
        "alpha": alpha,
        "bins": bins,
        "localized": localized,
        "chunk_size": chunk_size if localized else None,
        "dropped": dropped,
        "p_values": worst_p,
    }
    return RcaResult(ranked=ranked, method=method, metadata=metadata)
