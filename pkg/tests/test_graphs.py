import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rcaforge.errors import (
    CycleError,
    KnowledgeConflict,
    MixedEdgeError,
    UnknownNode,
)
from rcaforge.graphs import (
    DomainKnowledge,
    MixedGraph,
    SepsetMap,
    apply_knowledge,
    dag_to_cpdag,
    descendants,
    extend_to_dag,
    force_dag,
    meek_propagate,
    orient_v_structures,
    topological_sort,
)

from .oracles import closure_descendants


def g(nodes, directed=(), undirected=()):
    return MixedGraph(tuple(nodes), frozenset(directed), frozenset(undirected))


CHAIN = g("ABC", [("A", "B"), ("B", "C")])
DIAMOND = g("ABCD", [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")])


@st.composite
def random_dags(draw, max_nodes=8):
    n = draw(st.integers(min_value=1, max_value=max_nodes))
    nodes = [f"n{i}" for i in range(n)]
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                edges.add((nodes[i], nodes[j]))
    return g(nodes, edges)


class TestMixedGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            g("AB", [("A", "A")])

    def test_rejects_pair_in_both_sets(self):
        with pytest.raises(ValueError):
            g("AB", [("A", "B")], [("B", "A")])

    def test_rejects_unknown_endpoint(self):
        with pytest.raises(UnknownNode):
            g("AB", [("A", "C")])

    def test_equality_ignores_node_order(self):
        a = g("AB", [("A", "B")])
        b = MixedGraph(("B", "A"), frozenset({("A", "B")}), frozenset())
        assert a == b

    def test_undirected_normalized(self):
        assert g("AB", undirected=[("B", "A")]).has_undirected("A", "B")

    def test_json_round_trip_field_names(self):
        doc = DIAMOND.to_json_dict()
        assert set(doc) == {"nodes", "directed", "undirected"}
        assert MixedGraph.from_json(DIAMOND.to_json()) == DIAMOND

    def test_adjacency_csv(self):
        got = g("AB", [("A", "B")]).to_adjacency_csv()
        assert got == ",A,B\nA,0,1\nB,0,0\n"
        und = g("AB", undirected=[("A", "B")]).to_adjacency_csv()
        assert und == ",A,B\nA,0,1\nB,1,0\n"


class TestTopologicalSort:
    def test_chain_is_forced(self):
        assert topological_sort(CHAIN) == ["A", "B", "C"]

    def test_two_cycle_raises(self):
        with pytest.raises(CycleError):
            topological_sort(g("AB", [("A", "B"), ("B", "A")]))

    def test_diamond_endpoints(self):
        order = topological_sort(DIAMOND)
        assert order[0] == "A" and order[-1] == "D"

    def test_mixed_edges_rejected(self):
        with pytest.raises(MixedEdgeError):
            topological_sort(g("AB", undirected=[("A", "B")]))

    def test_deterministic_tie_break_by_node_order(self):
        assert topological_sort(g("CBA")) == ["C", "B", "A"]


class TestDescendants:
    def test_chain(self):
        assert descendants(CHAIN, "A") == {"B", "C"}

    def test_sink_is_empty(self):
        assert descendants(CHAIN, "C") == set()

    def test_diamond(self):
        assert descendants(DIAMOND, "A") == {"B", "C", "D"}

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            descendants(CHAIN, "Q")

    @settings(max_examples=60, deadline=None)
    @given(random_dags())
    def test_matches_matrix_squaring_closure(self, dag):
        for v in dag.nodes:
            assert descendants(dag, v) == closure_descendants(dag, v)


class TestOrientVStructures:
    def test_collider_oriented(self):
        skel = g("ABC", undirected=[("A", "C"), ("B", "C")])
        seps = SepsetMap()
        seps.record("A", "B", [])
        out = orient_v_structures(skel, seps)
        assert out.directed == {("A", "C"), ("B", "C")}
        assert not out.undirected

    def test_sepset_containing_middle_blocks_orientation(self):
        skel = g("ABC", undirected=[("A", "C"), ("B", "C")])
        seps = SepsetMap()
        seps.record("A", "B", ["C"])
        out = orient_v_structures(skel, seps)
        assert not out.directed
        assert out.undirected == skel.undirected

    def test_double_collider(self):
        # A-C-B and A-D-B, with C and D both outside sepset(A, B):
        # enumerating unshielded triples by hand orients both colliders.
        skel = g("ABCD", undirected=[("A", "C"), ("B", "C"), ("A", "D"), ("B", "D")])
        seps = SepsetMap()
        seps.record("A", "B", [])
        out = orient_v_structures(skel, seps)
        assert out.directed == {("A", "C"), ("B", "C"), ("A", "D"), ("B", "D")}

    def test_conflicting_orientation_left_undirected(self):
        # B-C is pushed B->C by triple (A, C, B) and C->B by triple (D, B, C).
        skel = g("ABCD", undirected=[("A", "C"), ("B", "C"), ("B", "D")])
        seps = SepsetMap()
        seps.record("A", "B", [])  # orients A->C, B->C
        seps.record("C", "D", [])  # orients C->B, D->B
        out = orient_v_structures(skel, seps)
        assert out.has_undirected("B", "C")
        assert out.has_directed("A", "C") and out.has_directed("D", "B")

    def test_missing_sepset_skipped(self):
        skel = g("ABC", undirected=[("A", "C"), ("B", "C")])
        out = orient_v_structures(skel, SepsetMap())
        assert not out.directed


class TestMeekPropagate:
    def test_r1(self):
        before = g("ABC", [("A", "B")], [("B", "C")])
        assert meek_propagate(before).has_directed("B", "C")

    def test_r2(self):
        before = g("ABC", [("A", "B"), ("B", "C")], [("A", "C")])
        assert meek_propagate(before).has_directed("A", "C")

    def test_undirected_triangle_unchanged(self):
        tri = g("ABC", undirected=[("A", "B"), ("B", "C"), ("A", "C")])
        assert meek_propagate(tri) == tri

    def test_r3(self):
        before = g(
            "ABCD",
            [("C", "B"), ("D", "B")],
            [("A", "B"), ("A", "C"), ("A", "D")],
        )
        assert meek_propagate(before).has_directed("A", "B")

    def test_r4(self):
        before = g(
            "ABCD",
            [("C", "D"), ("D", "B")],
            [("A", "B"), ("A", "C"), ("A", "D")],
        )
        assert meek_propagate(before).has_directed("A", "B")

    @settings(max_examples=40, deadline=None)
    @given(random_dags(max_nodes=6))
    def test_idempotent_on_cpdag_pipeline(self, dag):
        cpdag = dag_to_cpdag(dag)
        assert meek_propagate(cpdag) == cpdag


class TestApplyKnowledge:
    def test_forbidden_one_direction_orients(self):
        out = apply_knowledge(
            g("AB", undirected=[("A", "B")]),
            DomainKnowledge(forbidden={("B", "A")}),
        )
        assert out.directed == {("A", "B")} and not out.undirected

    def test_forbidden_both_directions_deletes(self):
        out = apply_knowledge(
            g("AB", undirected=[("A", "B")]),
            DomainKnowledge(forbidden={("A", "B"), ("B", "A")}),
        )
        assert not out.directed and not out.undirected

    def test_required_added_to_empty(self):
        out = apply_knowledge(g("AB"), DomainKnowledge(required={("A", "B")}))
        assert out.directed == {("A", "B")}

    def test_required_overrides_reverse_edge(self):
        out = apply_knowledge(g("AB", [("B", "A")]), DomainKnowledge(required={("A", "B")}))
        assert out.directed == {("A", "B")}

    def test_root_reverses_incoming(self):
        out = apply_knowledge(g("AB", [("B", "A")]), DomainKnowledge(root_nodes={"A"}))
        assert out.directed == {("A", "B")}

    def test_root_reversal_blocked_by_forbid_deletes(self):
        out = apply_knowledge(
            g("AB", [("B", "A")]),
            DomainKnowledge(root_nodes={"A"}, forbidden={("A", "B")}),
        )
        assert not out.directed and not out.undirected

    def test_leaf_reverses_outgoing(self):
        out = apply_knowledge(g("AB", [("A", "B")]), DomainKnowledge(leaf_nodes={"A"}))
        assert out.directed == {("B", "A")}

    def test_unknown_name_rejected(self):
        with pytest.raises(UnknownNode):
            apply_knowledge(g("AB"), DomainKnowledge(root_nodes={"Q"}))

    def test_conflicting_knowledge_rejected_at_construction(self):
        with pytest.raises(KnowledgeConflict):
            DomainKnowledge(forbidden={("A", "B")}, required={("A", "B")})
        with pytest.raises(KnowledgeConflict):
            DomainKnowledge(required={("B", "A")}, root_nodes={"A"})
        with pytest.raises(KnowledgeConflict):
            DomainKnowledge(required={("A", "B")}, leaf_nodes={"A"})
        with pytest.raises(KnowledgeConflict):
            DomainKnowledge(required={("A", "B"), ("B", "A")})

    @settings(max_examples=60, deadline=None)
    @given(random_dags(max_nodes=6), st.data())
    def test_postconditions_hold(self, dag, data):
        nodes = list(dag.nodes)
        if len(nodes) < 2:
            return
        forbidden = set()
        for a in nodes:
            for b in nodes:
                if a != b and data.draw(st.booleans(), label=f"forbid {a}->{b}"):
                    forbidden.add((a, b))
        candidates = [
            (a, b) for a in nodes for b in nodes
            if a != b and (a, b) not in forbidden
        ]
        required = set()
        for pair in data.draw(st.lists(st.sampled_from(candidates), max_size=2)) if candidates else []:
            if (pair[1], pair[0]) not in required:
                required.add(pair)
        roots = {a for a in nodes
                 if not any(b == a for _, b in required)
                 and data.draw(st.booleans(), label=f"root {a}")}
        leaves = {a for a in nodes
                  if a not in roots
                  and not any(x == a for x, _ in required)
                  and data.draw(st.booleans(), label=f"leaf {a}")}
        k = DomainKnowledge(forbidden=frozenset(forbidden), required=frozenset(required),
                            root_nodes=frozenset(roots), leaf_nodes=frozenset(leaves))
        out = apply_knowledge(dag, k)
        for a, b in k.required:
            assert out.has_directed(a, b)
        for a, b in k.forbidden:
            assert not out.has_directed(a, b)
        for r in roots:
            assert not out.parents(r) and not out.undirected_neighbors(r)
        for l in leaves:
            assert not out.children(l) and not out.undirected_neighbors(l)


class TestDagExtension:
    def test_orients_by_node_order(self):
        out = extend_to_dag(g("ABC", undirected=[("B", "A"), ("C", "B")]))
        assert out.directed == {("A", "B"), ("B", "C")}

    def test_respects_existing_orientation(self):
        out = extend_to_dag(g("ABC", [("C", "B")], [("A", "C")]))
        assert out.has_directed("C", "B") and out.has_directed("A", "C")

    def test_avoids_cycle_by_flipping(self):
        # node order would give A->B, but B ~> A is already directed
        out = extend_to_dag(g("ABC", [("B", "C"), ("C", "A")], [("A", "B")]))
        topological_sort(out)
        assert out.has_directed("B", "A")

    def test_cyclic_directed_part_raises(self):
        with pytest.raises(CycleError):
            extend_to_dag(g("AB", [("A", "B"), ("B", "A")]))

    def test_force_dag_repairs_cycle_and_keeps_skeleton(self):
        broken = g("ABC", [("A", "B"), ("B", "C"), ("C", "A")])
        fixed = force_dag(broken)
        topological_sort(fixed)
        assert fixed.skeleton_pairs() == broken.skeleton_pairs()

    @settings(max_examples=40, deadline=None)
    @given(random_dags(max_nodes=7))
    def test_extension_of_cpdag_is_acyclic_with_same_skeleton(self, dag):
        cpdag = dag_to_cpdag(dag)
        out = extend_to_dag(cpdag)
        topological_sort(out)
        assert out.skeleton_pairs() == dag.skeleton_pairs()


class TestDagToCpdag:
    def test_chain_fully_undirected(self):
        out = dag_to_cpdag(CHAIN)
        assert not out.directed
        assert out.undirected == {("A", "B"), ("B", "C")}

    def test_collider_stays_directed(self):
        out = dag_to_cpdag(g("ABC", [("A", "C"), ("B", "C")]))
        assert out.directed == {("A", "C"), ("B", "C")}

    def test_diamond(self):
        out = dag_to_cpdag(DIAMOND)
        assert out.directed == {("B", "D"), ("C", "D")}
        assert out.undirected == {("A", "B"), ("A", "C")}

    @settings(max_examples=40, deadline=None)
    @given(random_dags(max_nodes=6))
    def test_every_dag_from_this_module_topologically_sorts(self, dag):
        topological_sort(dag)
        topological_sort(extend_to_dag(dag_to_cpdag(dag)))
