"""Mixed causal graphs and the operations the discovery pipeline needs.

A :class:`MixedGraph` stores a node list plus directed and undirected edge
sets, which is enough to represent DAGs (no undirected edges), skeletons
(no directed edges) and CPDAGs (both).  All graph values are immutable;
every operation returns a new graph, so graphs can be shared freely across
threads or processes.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import CycleError, KnowledgeConflict, MixedEdgeError, UnknownNode

Pair = tuple[str, str]


def _norm(a: str, b: str) -> Pair:
    """Canonical (sorted) form of an unordered pair."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False, repr=False)
class MixedGraph:
    """Node set with directed (cause -> effect) and undirected edges.

    Invariants, enforced at construction: no self-loops, no pair present
    both directed and undirected, all edge endpoints in ``nodes``.
    Undirected pairs are stored in lexicographically sorted form.
    """

    nodes: tuple[str, ...]
    directed: frozenset = frozenset()
    undirected: frozenset = frozenset()

    def __post_init__(self):
        nodes = tuple(self.nodes)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node names")
        node_set = set(nodes)
        directed = frozenset((a, b) for a, b in self.directed)
        undirected = frozenset(_norm(a, b) for a, b in self.undirected)
        for a, b in directed | undirected:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in node_set or b not in node_set:
                raise UnknownNode(f"edge ({a!r}, {b!r}) references unknown node")
        for a, b in directed:
            if _norm(a, b) in undirected:
                raise ValueError(f"pair ({a!r}, {b!r}) is both directed and undirected")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "directed", directed)
        object.__setattr__(self, "undirected", undirected)
        parents: dict[str, set[str]] = {v: set() for v in nodes}
        children: dict[str, set[str]] = {v: set() for v in nodes}
        neighbors: dict[str, set[str]] = {v: set() for v in nodes}
        for a, b in directed:
            children[a].add(b)
            parents[b].add(a)
        for a, b in undirected:
            neighbors[a].add(b)
            neighbors[b].add(a)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)
        object.__setattr__(self, "_neighbors", neighbors)

    # -- queries ---------------------------------------------------------

    def parents(self, v: str) -> set[str]:
        self._check_node(v)
        return set(self._parents[v])

    def children(self, v: str) -> set[str]:
        self._check_node(v)
        return set(self._children[v])

    def undirected_neighbors(self, v: str) -> set[str]:
        self._check_node(v)
        return set(self._neighbors[v])

    def adjacent(self, a: str, b: str) -> bool:
        """True if any edge (directed either way, or undirected) joins a and b."""
        return (
            (a, b) in self.directed
            or (b, a) in self.directed
            or _norm(a, b) in self.undirected
        )

    def has_directed(self, a: str, b: str) -> bool:
        return (a, b) in self.directed

    def has_undirected(self, a: str, b: str) -> bool:
        return _norm(a, b) in self.undirected

    @property
    def is_dag(self) -> bool:
        if self.undirected:
            return False
        try:
            topological_sort(self)
        except CycleError:
            return False
        return True

    def skeleton_pairs(self) -> frozenset:
        """All adjacencies as unordered pairs, orientation discarded."""
        return frozenset(_norm(a, b) for a, b in self.directed) | self.undirected

    def _check_node(self, v: str):
        if v not in self._parents:
            raise UnknownNode(f"unknown node {v!r}")

    # -- equality: edge-set equality given identical node sets -----------

    def __eq__(self, other):
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return (
            set(self.nodes) == set(other.nodes)
            and self.directed == other.directed
            and self.undirected == other.undirected
        )

    def __hash__(self):
        return hash((frozenset(self.nodes), self.directed, self.undirected))

    def __repr__(self):
        return (
            f"MixedGraph({len(self.nodes)} nodes, "
            f"{len(self.directed)} directed, {len(self.undirected)} undirected)"
        )

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "directed": sorted([a, b] for a, b in self.directed),
            "undirected": sorted([a, b] for a, b in self.undirected),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "MixedGraph":
        return cls(
            nodes=tuple(doc["nodes"]),
            directed=frozenset((a, b) for a, b in doc.get("directed", [])),
            undirected=frozenset((a, b) for a, b in doc.get("undirected", [])),
        )

    @classmethod
    def from_json(cls, text: str) -> "MixedGraph":
        return cls.from_json_dict(json.loads(text))

    def to_adjacency_csv(self) -> str:
        """Adjacency matrix CSV, row = cause, col = effect, 1/0.

        Undirected edges are marked 1 in both directions.
        """
        buf = io.StringIO()
        buf.write("," + ",".join(self.nodes) + "\n")
        for a in self.nodes:
            row = []
            for b in self.nodes:
                on = a != b and ((a, b) in self.directed or self.has_undirected(a, b))
                row.append("1" if on else "0")
            buf.write(a + "," + ",".join(row) + "\n")
        return buf.getvalue()


class SepsetMap:
    """Separating sets recorded while edges are removed during discovery.

    Keys are unordered node pairs; a key being present means the pair was
    separated by the stored conditioning set.
    """

    def __init__(self):
        self._sets: dict[Pair, tuple[str, ...]] = {}

    def record(self, a: str, b: str, z: Iterable[str]):
        self._sets[_norm(a, b)] = tuple(z)

    def get(self, a: str, b: str):
        """The conditioning set for (a, b), or None if never separated."""
        return self._sets.get(_norm(a, b))

    def __contains__(self, pair) -> bool:
        return _norm(*pair) in self._sets

    def __len__(self):
        return len(self._sets)

    def items(self):
        return self._sets.items()


@dataclass(frozen=True)
class DomainKnowledge:
    """Expert constraints: forbidden/required edges and root/leaf nodes."""

    forbidden: frozenset = frozenset()
    required: frozenset = frozenset()
    root_nodes: frozenset = frozenset()
    leaf_nodes: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "forbidden", frozenset(tuple(p) for p in self.forbidden))
        object.__setattr__(self, "required", frozenset(tuple(p) for p in self.required))
        object.__setattr__(self, "root_nodes", frozenset(self.root_nodes))
        object.__setattr__(self, "leaf_nodes", frozenset(self.leaf_nodes))
        for a, b in self.forbidden | self.required:
            if a == b:
                raise KnowledgeConflict(f"self-loop constraint on {a!r}")
        clash = self.forbidden & self.required
        if clash:
            raise KnowledgeConflict(f"edges both forbidden and required: {sorted(clash)}")
        two_cycle = {p for p in self.required if (p[1], p[0]) in self.required}
        if two_cycle:
            raise KnowledgeConflict(
                f"edges required in both directions: {sorted(two_cycle)}"
            )
        for a, b in self.required:
            if b in self.root_nodes:
                raise KnowledgeConflict(f"required edge ({a!r}, {b!r}) targets root node {b!r}")
            if a in self.leaf_nodes:
                raise KnowledgeConflict(f"required edge ({a!r}, {b!r}) leaves leaf node {a!r}")

    @property
    def is_empty(self) -> bool:
        return not (self.forbidden or self.required or self.root_nodes or self.leaf_nodes)

    def names(self) -> set[str]:
        out = set(self.root_nodes) | set(self.leaf_nodes)
        for a, b in self.forbidden | self.required:
            out.add(a)
            out.add(b)
        return out

    def blocks(self, a: str, b: str) -> bool:
        """True if the directed edge a -> b is ruled out by any constraint."""
        return (a, b) in self.forbidden or b in self.root_nodes or a in self.leaf_nodes


EMPTY_KNOWLEDGE = DomainKnowledge()


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------


def topological_sort(g: MixedGraph) -> list[str]:
    """Topological order of a directed graph.

    Deterministic: among ready nodes, the one earliest in ``g.nodes`` wins.
    Raises MixedEdgeError if undirected edges remain, CycleError on cycles.
    """
    if g.undirected:
        raise MixedEdgeError(f"{len(g.undirected)} undirected edges remain")
    position = {v: i for i, v in enumerate(g.nodes)}
    indegree = {v: len(g._parents[v]) for v in g.nodes}
    ready = sorted((v for v in g.nodes if indegree[v] == 0), key=position.get)
    order: list[str] = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        opened = []
        for c in g._children[v]:
            indegree[c] -= 1
            if indegree[c] == 0:
                opened.append(c)
        if opened:
            ready = sorted(ready + opened, key=position.get)
    if len(order) != len(g.nodes):
        raise CycleError("directed cycle detected")
    return order


def descendants(g: MixedGraph, v: str) -> set[str]:
    """All nodes reachable from v via directed edges, excluding v itself."""
    g._check_node(v)
    seen: set[str] = set()
    stack = list(g._children[v])
    while stack:
        u = stack.pop()
        if u in seen:
            continue
        seen.add(u)
        stack.extend(g._children[u])
    seen.discard(v)
    return seen


def orient_v_structures(skeleton: MixedGraph, sepsets: SepsetMap) -> MixedGraph:
    """Turn unshielded triples a - c - b with c outside sepset(a, b) into colliders.

    An edge that different triples try to orient both ways is left
    undirected (conservative handling).  Triples whose endpoint pair has no
    recorded sepset (e.g. the pair was excluded by domain knowledge rather
    than by a test) are skipped.
    """
    if skeleton.directed:
        raise MixedEdgeError("v-structure orientation expects an undirected skeleton")
    votes: set[Pair] = set()
    for c in skeleton.nodes:
        nbrs = sorted(skeleton._neighbors[c])
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1 :]:
                if skeleton.adjacent(a, b):
                    continue
                z = sepsets.get(a, b)
                if z is None or c in z:
                    continue
                votes.add((a, c))
                votes.add((b, c))
    directed = {(a, b) for a, b in votes if (b, a) not in votes}
    touched = {_norm(a, b) for a, b in directed}
    undirected = {p for p in skeleton.undirected if p not in touched}
    return MixedGraph(skeleton.nodes, frozenset(directed), frozenset(undirected))


def meek_propagate(g: MixedGraph) -> MixedGraph:
    """Apply the four Meek orientation rules to a fixed point.

    R1: a -> b - c with a, c nonadjacent          => b -> c
    R2: a -> b -> c with a - c                    => a -> c
    R3: a - b, a - c -> b, a - d -> b, c,d nonadj => a -> b
    R4: a - b, a - c, c -> d -> b, c? (chain),
        with c, b nonadjacent                     => a -> b
    Idempotent; never removes an edge.
    """
    directed = set(g.directed)
    undirected = set(g.undirected)
    parents = {v: set(g._parents[v]) for v in g.nodes}
    neighbors = {v: set(g._neighbors[v]) for v in g.nodes}

    def adj(a, b):
        return b in neighbors[a] or (a, b) in directed or (b, a) in directed

    def orient(a, b):
        undirected.discard(_norm(a, b))
        neighbors[a].discard(b)
        neighbors[b].discard(a)
        directed.add((a, b))
        parents[b].add(a)

    changed = True
    while changed:
        changed = False
        for pair in sorted(undirected):
            for a, b in (pair, pair[::-1]):
                # R1: some parent of a nonadjacent to b
                if any(not adj(p, b) for p in parents[a]):
                    orient(a, b)
                    changed = True
                    break
                # R2: directed path a -> k -> b of length 2
                if any((a, k) in directed and (k, b) in directed for k in g.nodes):
                    orient(a, b)
                    changed = True
                    break
                # R3: two undirected neighbors of a, both parents of b, nonadjacent
                cands = [c for c in sorted(neighbors[a]) if (c, b) in directed]
                if any(
                    not adj(c, d)
                    for i, c in enumerate(cands)
                    for d in cands[i + 1 :]
                ):
                    orient(a, b)
                    changed = True
                    break
                # R4: a - c, c -> d -> b with c, b nonadjacent
                hit = False
                for c in sorted(neighbors[a]):
                    if adj(c, b):
                        continue
                    if any((c, d) in directed and (d, b) in directed for d in g.nodes):
                        hit = True
                        break
                if hit:
                    orient(a, b)
                    changed = True
                    break
    return MixedGraph(g.nodes, frozenset(directed), frozenset(undirected))


def apply_knowledge(g: MixedGraph, k: DomainKnowledge) -> MixedGraph:
    """Force a graph to satisfy domain-knowledge constraints.

    Forbidden pairs are removed (or, for undirected edges forbidden in one
    direction only, oriented the other way); root/leaf declarations strip or
    reverse incompatible edges; required edges are added last and oriented as
    declared.  Reversal is only used when the reversed edge is itself
    admissible, otherwise the edge is deleted.
    """
    missing = k.names() - set(g.nodes)
    if missing:
        raise UnknownNode(f"knowledge references unknown nodes: {sorted(missing)}")

    directed = set(g.directed)
    undirected = set(g.undirected)

    def admissible(a, b):
        return not k.blocks(a, b)

    for a, b in sorted(k.forbidden):
        directed.discard((a, b))
        if _norm(a, b) in undirected:
            undirected.discard(_norm(a, b))
            if (b, a) not in k.forbidden:
                directed.add((b, a))

    for r in sorted(k.root_nodes):
        for a, b in sorted(directed):
            if b == r:
                directed.discard((a, b))
                if admissible(r, a):
                    directed.add((r, a))
        for pair in sorted(undirected):
            if r in pair:
                other = pair[0] if pair[1] == r else pair[1]
                undirected.discard(pair)
                if admissible(r, other):
                    directed.add((r, other))

    for l in sorted(k.leaf_nodes):
        for a, b in sorted(directed):
            if a == l:
                directed.discard((a, b))
                if admissible(b, l):
                    directed.add((b, l))
        for pair in sorted(undirected):
            if l in pair:
                other = pair[0] if pair[1] == l else pair[1]
                undirected.discard(pair)
                if admissible(other, l):
                    directed.add((other, l))

    for a, b in sorted(k.required):
        undirected.discard(_norm(a, b))
        directed.discard((b, a))
        directed.add((a, b))

    return MixedGraph(g.nodes, frozenset(directed), frozenset(undirected))


def extend_to_dag(g: MixedGraph) -> MixedGraph:
    """Deterministic DAG extension of a partially directed graph.

    Undirected edges are oriented from the lower to the higher node index
    (position in ``g.nodes``); when that would close a directed cycle the
    opposite orientation is used instead.  Raises CycleError if the directed
    part already contains a cycle.
    """
    position = {v: i for i, v in enumerate(g.nodes)}
    directed = set(g.directed)
    children: dict[str, set[str]] = {v: set() for v in g.nodes}
    for a, b in directed:
        children[a].add(b)

    def reaches(src, dst):
        stack, seen = [src], set()
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(children[u])
        return False

    if any(reaches(b, a) for a, b in directed):
        raise CycleError("directed part of the graph is cyclic")

    for pair in sorted(g.undirected, key=lambda p: (min(position[p[0]], position[p[1]]),
                                                    max(position[p[0]], position[p[1]]))):
        a, b = sorted(pair, key=position.get)
        if reaches(b, a):
            a, b = b, a
        if reaches(b, a):
            raise CycleError(f"cannot orient {pair} without creating a cycle")
        directed.add((a, b))
        children[a].add(b)

    out = MixedGraph(g.nodes, frozenset(directed), frozenset())
    topological_sort(out)  # raises CycleError if extension failed
    return out


def force_dag(g: MixedGraph) -> MixedGraph:
    """Total, deterministic DAG repair for slightly inconsistent graphs.

    Finite-sample discovery can emit partially directed graphs whose
    directed part is cyclic (conflicting collider orientations along a
    loop).  This keeps the skeleton: directed edges are re-added in sorted
    order, skipping any that would close a cycle (those fall back to
    node-order orientation like undirected edges).
    """
    position = {v: i for i, v in enumerate(g.nodes)}
    children: dict[str, set[str]] = {v: set() for v in g.nodes}
    directed: set[Pair] = set()

    def reaches(src, dst):
        stack, seen = [src], set()
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            if u in seen:
                continue
            seen.add(u)
            stack.extend(children[u])
        return False

    def add(a, b):
        directed.add((a, b))
        children[a].add(b)

    leftovers: list[Pair] = []
    for a, b in sorted(g.directed):
        if reaches(b, a):
            leftovers.append(_norm(a, b))
        else:
            add(a, b)
    for pair in sorted(set(leftovers) | set(g.undirected)):
        a, b = sorted(pair, key=position.get)
        if reaches(b, a):
            a, b = b, a
        add(a, b)
    out = MixedGraph(g.nodes, frozenset(directed), frozenset())
    topological_sort(out)
    return out


def dag_to_cpdag(g: MixedGraph) -> MixedGraph:
    """Markov equivalence class (CPDAG) of a DAG.

    Builds the sepsets implied by d-separation (for a nonadjacent pair the
    parents of whichever node is not the other's descendant), orients the
    v-structures on the skeleton and closes under the Meek rules.
    """
    if g.undirected:
        raise MixedEdgeError("dag_to_cpdag expects a DAG")
    topological_sort(g)
    desc = {v: descendants(g, v) for v in g.nodes}
    sepsets = SepsetMap()
    for i, a in enumerate(g.nodes):
        for b in g.nodes[i + 1 :]:
            if g.adjacent(a, b):
                continue
            z = g._parents[a] if b not in desc[a] else g._parents[b]
            sepsets.record(a, b, sorted(z))
    skeleton = MixedGraph(g.nodes, frozenset(), frozenset(_norm(a, b) for a, b in g.directed))
    return meek_propagate(orient_v_structures(skeleton, sepsets))
