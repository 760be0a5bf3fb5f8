import numpy as np
import pytest

from rcaforge.errors import (
    KnowledgeConflict,
    NonMonotonicTimestamps,
    NonNumericCell,
    ParseError,
    SchemaError,
)
from rcaforge.graphs import DomainKnowledge, MixedGraph
from rcaforge.io import (
    dump_knowledge,
    dump_metrics,
    load_graph,
    load_metrics,
    parse_knowledge,
    write_graph,
)
from rcaforge.stats import MetricFrame


class TestLoadMetrics:
    def test_two_column_csv(self):
        frame = load_metrics("timestamp,m1\n0,1.5\n1,2.5\n")
        assert len(frame) == 2
        assert frame.values("m1").tolist() == [1.5, 2.5]
        assert frame.timestamps.tolist() == [0, 1]

    def test_non_monotonic_rejected(self):
        with pytest.raises(NonMonotonicTimestamps) as err:
            load_metrics("timestamp,m1\n1,1.0\n1,2.0\n")
        assert err.value.row == 2

    def test_non_numeric_cell_located(self):
        with pytest.raises(NonNumericCell) as err:
            load_metrics("timestamp,m1,m2\n0,1.0,2.0\n1,abc,3.0\n")
        assert err.value.row == 2 and err.value.column == "m1"

    def test_iso_8601_timestamps(self):
        frame = load_metrics(
            "timestamp,m\n1970-01-01T00:00:00Z,1.0\n1970-01-01T00:01:00Z,2.0\n"
        )
        assert frame.timestamps.tolist() == [0, 60]

    def test_header_must_start_with_timestamp(self):
        with pytest.raises(ParseError):
            load_metrics("time,m\n0,1.0\n")

    def test_needs_data_rows(self):
        with pytest.raises(ParseError):
            load_metrics("timestamp,m\n")

    def test_duplicate_metric_names_rejected(self):
        with pytest.raises(ParseError):
            load_metrics("timestamp,m,m\n0,1.0,2.0\n")

    def test_ragged_row_rejected(self):
        with pytest.raises(ParseError) as err:
            load_metrics("timestamp,m\n0,1.0\n1\n")
        assert err.value.row == 2

    def test_bytes_input(self):
        frame = load_metrics(b"timestamp,m\n0,1.0\n")
        assert len(frame) == 1

    def test_path_input(self, tmp_path):
        p = tmp_path / "m.csv"
        p.write_text("timestamp,m\n0,1.0\n")
        assert len(load_metrics(p)) == 1


class TestMetricsRoundTrip:
    def test_random_frames_round_trip_exactly(self):
        rng = np.random.default_rng(17)
        for trial in range(5):
            n = int(rng.integers(1, 40))
            frame = MetricFrame(
                np.cumsum(rng.integers(1, 9, size=n)),
                {f"m{i}": rng.normal(size=n) * 10 ** int(rng.integers(-8, 8))
                 for i in range(int(rng.integers(1, 5)))},
            )
            assert load_metrics(dump_metrics(frame)) == frame

    def test_special_values_round_trip(self):
        frame = MetricFrame(
            np.array([0, 1, 2]),
            {"m": np.array([0.1, -1e-300, 12345678.9012345])},
        )
        assert load_metrics(dump_metrics(frame)) == frame


class TestKnowledge:
    def test_empty_document(self):
        k = parse_knowledge("")
        assert k.is_empty

    def test_full_document_round_trip(self):
        k = DomainKnowledge(
            forbidden={("a", "b"), ("c", "d")},
            required={("x", "y")},
            root_nodes={"r"},
            leaf_nodes={"l"},
        )
        assert parse_knowledge(dump_knowledge(k)) == k

    def test_forbid_and_require_conflict(self):
        with pytest.raises(KnowledgeConflict):
            parse_knowledge("forbids: [[A, B]]\nrequires: [[A, B]]\n")

    def test_required_into_root_conflict(self):
        with pytest.raises(KnowledgeConflict):
            parse_knowledge("root-nodes: [A]\nrequires: [[B, A]]\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(SchemaError):
            parse_knowledge("forbidden: [[A, B]]\n")

    def test_malformed_pair_rejected(self):
        with pytest.raises(SchemaError):
            parse_knowledge("forbids: [[A, B, C]]\n")
        with pytest.raises(SchemaError):
            parse_knowledge("forbids: [A]\n")

    def test_non_mapping_rejected(self):
        with pytest.raises(SchemaError):
            parse_knowledge("- a\n- b\n")


class TestGraphFiles:
    def test_graph_file_round_trip(self, tmp_path):
        graph = MixedGraph(
            ("a", "b", "c"),
            frozenset({("a", "b")}),
            frozenset({("b", "c")}),
        )
        write_graph(graph, tmp_path / "g.json")
        assert load_graph(tmp_path / "g.json") == graph
