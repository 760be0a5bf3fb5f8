"""Causal graph construction under domain-knowledge constraints.

Two algorithms: PC (constraint-based, stable variant by default) and a
greedy score-based search over DAG space driven by the local BIC.  Both
return CPDAGs and honor forbidden/required edges and root/leaf
declarations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import KnowledgeConflict
from .graphs import (
    EMPTY_KNOWLEDGE,
    DomainKnowledge,
    MixedGraph,
    SepsetMap,
    _norm,
    apply_knowledge,
    dag_to_cpdag,
    meek_propagate,
    orient_v_structures,
    topological_sort,
)
from .stats import MetricFrame, _partial_corr_from_cov, fisher_z_test


@dataclass(frozen=True)
class PcConfig:
    alpha: float = 0.05
    max_cond_size: int | None = 3
    stable: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class GesConfig:
    """Greedy-search knobs.  max_parents=None lifts the per-node cap.

    The default cap of 2 keeps per-node models small; the uncapped search
    compensates for early orientation mistakes by piling shortcut parents
    onto colliders, which inflates the skeleton well past the true edge
    count at benchmark scale.
    """

    max_parents: int | None = 2

    def __post_init__(self):
        if self.max_parents is not None and self.max_parents < 0:
            raise ValueError("max_parents must be >= 0")


class _CorrTester:
    """Fisher-z CI tests backed by one precomputed covariance matrix.

    Submatrices are assembled in canonical (x, y, sorted z) order, so test
    decisions do not depend on the column order of the input frame.
    """

    def __init__(self, f: MetricFrame):
        self.n = len(f)
        self.index = {name: i for i, name in enumerate(f.names)}
        self.cov = np.cov(f.matrix(), rowvar=False)

    def p_value(self, x: str, y: str, z: tuple[str, ...]) -> float:
        idx = [self.index[x], self.index[y]] + [self.index[c] for c in z]
        sub = self.cov[np.ix_(idx, idx)]
        if not z:
            denom = sub[0, 0] * sub[1, 1]
            r = 0.0 if denom <= 0 else float(sub[0, 1] / np.sqrt(denom))
            r = min(1.0, max(-1.0, r))
        else:
            r = _partial_corr_from_cov(sub)
        return fisher_z_test(r, self.n, len(z)).p_value


def pc_discover(
    f: MetricFrame,
    knowledge: DomainKnowledge = EMPTY_KNOWLEDGE,
    config: PcConfig = PcConfig(),
) -> MixedGraph:
    """PC algorithm: skeleton by recursive CI testing, then orientation.

    Starts from the complete undirected graph minus pairs forbidden in both
    directions; for growing conditioning sizes, removes an edge as soon as
    some subset of a neighbor snapshot renders the pair independent at
    ``alpha`` (stable variant snapshots adjacency per level).  Required
    edges are never tested or removed.  V-structures and Meek propagation
    orient the result; knowledge constraints are applied last.
    """
    names = list(f.names)
    if len(names) < 2:
        raise ValueError("need at least 2 columns")
    max_cond = config.max_cond_size
    if max_cond is None:
        max_cond = len(names) - 2
    if len(f) <= max_cond + 3:
        raise ValueError(f"need n > max_cond_size + 3, got n={len(f)}")
    missing = knowledge.names() - set(names)
    if missing:
        raise KnowledgeConflict(f"knowledge references unknown metrics: {sorted(missing)}")

    tester = _CorrTester(f)
    required = {_norm(a, b) for a, b in knowledge.required}
    adj: dict[str, set[str]] = {v: set() for v in names}
    for a, b in combinations(sorted(names), 2):
        if knowledge.blocks(a, b) and knowledge.blocks(b, a):
            continue
        adj[a].add(b)
        adj[b].add(a)

    sepsets = SepsetMap()
    level = 0
    while level <= max_cond:
        snapshot = {v: sorted(adj[v]) for v in names} if config.stable else None
        any_testable = False
        for a in sorted(names):
            for b in sorted(adj[a]):
                if a >= b or _norm(a, b) in required:
                    continue
                removed = False
                for u, v in ((a, b), (b, a)):
                    base = snapshot[u] if config.stable else sorted(adj[u])
                    pool = [w for w in base if w != v]
                    if len(pool) < level:
                        continue
                    any_testable = True
                    for z in combinations(pool, level):
                        if tester.p_value(u, v, z) > config.alpha:
                            adj[a].discard(b)
                            adj[b].discard(a)
                            sepsets.record(a, b, z)
                            removed = True
                            break
                    if removed:
                        break
        if not any_testable:
            break
        level += 1

    skeleton = MixedGraph(
        tuple(names),
        frozenset(),
        frozenset(_norm(a, b) for a in names for b in adj[a] if a < b),
    )
    g = orient_v_structures(skeleton, sepsets)
    g = meek_propagate(g)
    return apply_knowledge(g, knowledge)


# ---------------------------------------------------------------------------
# greedy BIC search
# ---------------------------------------------------------------------------


class _BicCache:
    """Local BIC scores from one covariance pass over the frame.

    Equivalent to regressing on raw data with an intercept; the acceptance
    tests assert agreement with stats.local_bic to 1e-9.
    """

    def __init__(self, f: MetricFrame):
        self.n = len(f)
        self.names = f.names
        self.index = {name: i for i, name in enumerate(f.names)}
        self.cov = np.cov(f.matrix(), rowvar=False)
        self.log_n = float(np.log(self.n))
        self._cache: dict[tuple, float] = {}

    def local(self, node: str, parents: frozenset) -> float:
        key = (node, parents)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        yi = self.index[node]
        var_y = self.cov[yi, yi]
        if parents:
            pix = [self.index[p] for p in sorted(parents)]
            cpp = self.cov[np.ix_(pix, pix)]
            cpy = self.cov[pix, yi]
            try:
                beta = np.linalg.solve(cpp, cpy)
            except np.linalg.LinAlgError:
                beta = np.linalg.lstsq(cpp, cpy, rcond=None)[0]
            sigma2 = float(var_y - cpy @ beta)
        else:
            sigma2 = float(var_y)
        # np.cov divides by n-1; RSS/n = sigma2 * (n-1)/n
        rss_over_n = max(sigma2 * (self.n - 1) / self.n, np.finfo(float).tiny)
        score = self.n * float(np.log(rss_over_n)) + (len(parents) + 1) * self.log_n
        self._cache[key] = score
        return score


@dataclass
class GesTrace:
    """Total-BIC trajectory of the greedy search, for diagnostics and tests."""

    forward_scores: list[float]
    backward_scores: list[float]
    edges: list[tuple[str, str, str]]  # (phase, a, b)


def ges_search(
    f: MetricFrame,
    knowledge: DomainKnowledge = EMPTY_KNOWLEDGE,
    config: GesConfig = GesConfig(),
) -> tuple[MixedGraph, GesTrace]:
    """Greedy DAG-space BIC search; returns the final DAG and its trace.

    Forward phase inserts the single edge with the largest BIC decrease
    until none improves; backward phase deletes likewise.  Required edges
    are inserted first and never deleted; forbidden edges (including
    root/leaf implications) are never inserted.  Ties break by
    lexicographic edge order.
    """
    names = sorted(f.names)
    missing = knowledge.names() - set(names)
    if missing:
        raise KnowledgeConflict(f"knowledge references unknown metrics: {sorted(missing)}")
    cache = _BicCache(f)
    max_parents = config.max_parents if config.max_parents is not None else len(names) - 1

    parents: dict[str, set[str]] = {v: set() for v in names}
    required = sorted(knowledge.required)
    for a, b in required:
        parents[b].add(a)
    _check_acyclic(parents, names)

    def reaches(src: str, dst: str) -> bool:
        stack, seen = [src], set()
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(c for c in names if u in parents[c])
        return False

    def total() -> float:
        return sum(cache.local(v, frozenset(parents[v])) for v in names)

    trace = GesTrace(forward_scores=[total()], backward_scores=[], edges=[])

    while True:
        best = None
        best_delta = -1e-10
        for a in names:
            for b in names:
                if a == b or a in parents[b] or b in parents[a]:
                    continue
                if knowledge.blocks(a, b) or len(parents[b]) >= max_parents:
                    continue
                if reaches(b, a):
                    continue
                cur = cache.local(b, frozenset(parents[b]))
                new = cache.local(b, frozenset(parents[b] | {a}))
                delta = new - cur
                if delta < best_delta:
                    best_delta = delta
                    best = (a, b)
        if best is None:
            break
        a, b = best
        parents[b].add(a)
        trace.forward_scores.append(trace.forward_scores[-1] + best_delta)
        trace.edges.append(("insert", a, b))

    trace.backward_scores.append(trace.forward_scores[-1])
    required_set = set(knowledge.required)
    while True:
        best = None
        best_delta = -1e-10
        for b in names:
            for a in sorted(parents[b]):
                if (a, b) in required_set:
                    continue
                cur = cache.local(b, frozenset(parents[b]))
                new = cache.local(b, frozenset(parents[b] - {a}))
                delta = new - cur
                if delta < best_delta:
                    best_delta = delta
                    best = (a, b)
        if best is None:
            break
        a, b = best
        parents[b].remove(a)
        trace.backward_scores.append(trace.backward_scores[-1] + best_delta)
        trace.edges.append(("delete", a, b))

    edges = frozenset((a, b) for b in names for a in parents[b])
    dag = MixedGraph(f.names, edges, frozenset())
    return dag, trace


def _check_acyclic(parents: dict[str, set[str]], names: list[str]):
    g = MixedGraph(tuple(names), frozenset((a, b) for b in names for a in parents[b]), frozenset())
    try:
        topological_sort(g)
    except Exception as exc:
        raise KnowledgeConflict("required edges form a directed cycle") from exc


def ges_discover(
    f: MetricFrame,
    knowledge: DomainKnowledge = EMPTY_KNOWLEDGE,
    config: GesConfig = GesConfig(),
) -> MixedGraph:
    """Greedy BIC search returning the CPDAG of the found DAG."""
    dag, _ = ges_search(f, knowledge, config)
    cpdag = dag_to_cpdag(dag)
    return apply_knowledge(cpdag, knowledge)
