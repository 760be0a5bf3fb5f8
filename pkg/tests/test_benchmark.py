import json

import pytest

from rcaforge.benchmark import BenchConfig, report_to_json, run_benchmark, run_case


SMALL = dict(cases=2, nodes=6, edges=8, samples=300, abnormal=80, seed_start=1)


class TestBenchConfig:
    def test_unknown_method_rejected(self):
        with pytest.raises(ValueError):
            BenchConfig(methods=("warp",))

    def test_unknown_graph_source_rejected(self):
        with pytest.raises(ValueError):
            BenchConfig(graphs=("oracle",))

    def test_needs_methods(self):
        with pytest.raises(ValueError):
            BenchConfig(methods=())


class TestRunCase:
    def test_record_shape(self):
        cfg = BenchConfig(**SMALL, methods=("ht", "eps"), graphs=("truth", "pc"))
        record = run_case(cfg, seed=1)
        assert record["seed"] == 1
        assert set(record["recalls"]) == {"ht@truth", "ht@pc", "eps"}
        assert set(record["graph_scores"]) == {"pc"}
        for key in record["recalls"]:
            assert set(record["recalls"][key]) == {"r1", "r3", "r5"}

    def test_truth_graph_strong_case_ht_perfect(self):
        cfg = BenchConfig(cases=1, nodes=8, edges=12, samples=500, abnormal=120,
                          root_causes=(1, 1), methods=("ht",), graphs=("truth",))
        record = run_case(cfg, seed=3)
        assert record["recalls"]["ht@truth"]["r1"] == 1.0


class TestRunBenchmark:
    def test_aggregates_and_markdown(self):
        cfg = BenchConfig(**SMALL, methods=("ht", "eps"), graphs=("truth",))
        report = run_benchmark(cfg)
        assert report.cases == 2
        assert set(report.recall) == {"ht@truth", "eps"}
        assert "Recall@1" in report.markdown
        assert report.failed == []
        assert report.wall_time_s > 0

    def test_case_cache_resumes(self, tmp_path):
        cfg = BenchConfig(**SMALL, methods=("ht",), graphs=("truth",),
                          case_dir=str(tmp_path / "cache"))
        first = run_benchmark(cfg)
        stamps = {p.name: p.stat().st_mtime_ns for p in (tmp_path / "cache").iterdir()}
        second = run_benchmark(cfg)
        assert report_to_json(first) == report_to_json(second)
        after = {p.name: p.stat().st_mtime_ns for p in (tmp_path / "cache").iterdir()}
        assert stamps == after  # cached cases were reused, not recomputed

    def test_report_json_excludes_wall_time(self):
        cfg = BenchConfig(**SMALL, methods=("ht",), graphs=("truth",))
        doc = json.loads(report_to_json(run_benchmark(cfg)))
        assert "wall_time_s" not in doc
        assert doc["interval"] == "standard_error"

    def test_workers_do_not_change_results(self):
        cfg1 = BenchConfig(**SMALL, methods=("ht",), graphs=("truth",), workers=1)
        cfg2 = BenchConfig(**SMALL, methods=("ht",), graphs=("truth",), workers=2)
        a = json.loads(report_to_json(run_benchmark(cfg1)))
        b = json.loads(report_to_json(run_benchmark(cfg2)))
        del a["config"]["workers"], b["config"]["workers"]
        assert a == b
