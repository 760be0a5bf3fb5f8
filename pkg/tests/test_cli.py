import json

import pytest

from rcaforge.cli import cli_main
from rcaforge.io import load_graph, load_metrics


@pytest.fixture(scope="module")
def case_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("case")
    rc = cli_main([
        "simulate", "--nodes", "6", "--edges", "8", "--normal", "400",
        "--abnormal", "100", "--seed", "7", "--out", str(out),
    ])
    assert rc == 0
    return out


class TestSimulate:
    def test_bundle_files(self, case_dir):
        for name in ("truth.json", "graph.json", "scm.json", "normal.csv", "abnormal.csv"):
            assert (case_dir / name).exists()
        truth = json.loads((case_dir / "truth.json").read_text())
        assert truth["seed"] == 7
        assert truth["mechanism"] == "mean_shift"
        assert 1 <= len(truth["targets"]) <= 3

    def test_frames_parse(self, case_dir):
        assert len(load_metrics(case_dir / "normal.csv")) == 400
        assert len(load_metrics(case_dir / "abnormal.csv")) == 100


class TestEvaluate:
    def test_identical_graphs(self, case_dir, capsys):
        rc = cli_main([
            "evaluate", "--est", str(case_dir / "graph.json"),
            "--truth", str(case_dir / "graph.json"),
        ])
        out = capsys.readouterr().out
        assert rc == 0
        assert "precision=1.0000" in out and "recall=1.0000" in out
        assert "f1=1.0000" in out and "shd=0" in out

    def test_missing_file_is_validation_error(self, tmp_path):
        rc = cli_main(["evaluate", "--est", str(tmp_path / "nope.json"),
                       "--truth", str(tmp_path / "nope.json")])
        assert rc == 1


class TestUsage:
    def test_unknown_subcommand_exits_one(self, capsys):
        rc = cli_main(["frobnicate"])
        assert rc == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag_exits_one(self, capsys):
        rc = cli_main(["evaluate", "--bogus", "x"])
        assert rc == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_no_arguments_exits_one(self):
        assert cli_main([]) == 1


class TestDiscoverAndScore:
    def test_discover_writes_parseable_graph(self, case_dir, tmp_path):
        out = tmp_path / "est.json"
        rc = cli_main(["discover", "--input", str(case_dir / "normal.csv"),
                       "--algo", "pc", "--out", str(out)])
        assert rc == 0
        graph = load_graph(out)
        assert set(graph.nodes) == set(load_metrics(case_dir / "normal.csv").names)

    def test_discover_respects_knowledge(self, case_dir, tmp_path):
        nodes = load_metrics(case_dir / "normal.csv").names
        kpath = tmp_path / "k.yaml"
        kpath.write_text(f"requires: [[{nodes[0]}, {nodes[1]}]]\n")
        out = tmp_path / "est.json"
        rc = cli_main(["discover", "--input", str(case_dir / "normal.csv"),
                       "--knowledge", str(kpath), "--algo", "pc", "--out", str(out)])
        assert rc == 0
        assert load_graph(out).has_directed(nodes[0], nodes[1])

    def test_score_result_schema(self, case_dir, tmp_path):
        out = tmp_path / "result.json"
        rc = cli_main(["score", "--method", "ht", "--graph", str(case_dir / "graph.json"),
                       "--normal", str(case_dir / "normal.csv"),
                       "--abnormal", str(case_dir / "abnormal.csv"),
                       "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"method", "ranked", "metadata"}
        assert doc["method"] == "ht"
        assert {"metric", "score"} == set(doc["ranked"][0])
        truth = json.loads((case_dir / "truth.json").read_text())
        assert doc["ranked"][0]["metric"] in truth["targets"]

    def test_two_phase_method_without_graph_fails_validation(self, case_dir, tmp_path):
        rc = cli_main(["score", "--method", "ht",
                       "--normal", str(case_dir / "normal.csv"),
                       "--abnormal", str(case_dir / "abnormal.csv"),
                       "--out", str(tmp_path / "r.json")])
        assert rc == 1

    def test_detect_writes_spans(self, case_dir, tmp_path):
        out = tmp_path / "spans.json"
        rc = cli_main(["detect", "--input", str(case_dir / "normal.csv"),
                       "--k-sigma", "3", "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert set(doc) == set(load_metrics(case_dir / "normal.csv").names)


class TestBench:
    def test_small_bench_runs_and_reports(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        rc = cli_main([
            "bench", "--cases", "2", "--nodes", "6", "--edges", "8",
            "--samples", "300", "--abnormal", "80",
            "--methods", "ht,eps", "--graphs", "truth",
            "--seed", "1", "--out", str(out),
        ])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["cases"] == 2
        assert "ht@truth" in doc["recall"] and "eps" in doc["recall"]
        assert "| Method |" in doc["markdown"]
