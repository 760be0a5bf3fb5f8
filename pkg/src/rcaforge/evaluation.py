"""Accuracy metrics for estimated graphs and root-cause rankings."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NodeMismatch
from .graphs import MixedGraph


@dataclass(frozen=True)
class GraphScore:
    precision: float
    recall: float
    f1: float
    shd: int


def _require_same_nodes(est: MixedGraph, truth: MixedGraph):
    if set(est.nodes) != set(truth.nodes):
        raise NodeMismatch("graphs have different node sets")


def adjacency_prf(est: MixedGraph, truth: MixedGraph) -> tuple[float, float, float]:
    """Precision/recall/F1 of the undirected skeletons.

    An empty estimate has precision 1.0 (vacuous), an empty truth recall 1.0.
    """
    _require_same_nodes(est, truth)
    e = est.skeleton_pairs()
    t = truth.skeleton_pairs()
    hits = len(e & t)
    precision = hits / len(e) if e else 1.0
    recall = hits / len(t) if t else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def graph_score(est: MixedGraph, truth: MixedGraph) -> GraphScore:
    p, r, f1 = adjacency_prf(est, truth)
    return GraphScore(precision=p, recall=r, f1=f1, shd=shd(est, truth))


def shd(est: MixedGraph, truth: MixedGraph) -> int:
    """Structural Hamming distance between two mixed graphs.

    Each node pair contributes 1 when the graphs disagree: missing edge,
    extra edge, reversed direction, or directed vs undirected.
    """
    _require_same_nodes(est, truth)

    def kind(g: MixedGraph, a: str, b: str) -> str:
        if g.has_directed(a, b):
            return ">"
        if g.has_directed(b, a):
            return "<"
        if g.has_undirected(a, b):
            return "-"
        return "."

    nodes = sorted(est.nodes)
    count = 0
    for i, a in enumerate(nodes):
        for b in nodes[i + 1 :]:
            if kind(est, a, b) != kind(truth, a, b):
                count += 1
    return count


def recall_at_k(ranked: list, truth: set, k: int) -> float:
    """|top-k of the ranking intersected with truth| / min(k, |truth|).

    ``ranked`` may be an RcaResult-style list of (metric, score) pairs or a
    plain list of metric names; an empty ranking scores 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not truth:
        raise ValueError("truth must be nonempty")
    names = [item[0] if isinstance(item, (tuple, list)) else item for item in ranked]
    top = set(names[:k])
    return len(top & set(truth)) / min(k, len(truth))
