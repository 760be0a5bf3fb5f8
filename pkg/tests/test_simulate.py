import numpy as np
import pytest

from rcaforge.errors import TooManyEdges, UnknownNode
from rcaforge.graphs import MixedGraph, topological_sort
from rcaforge.simulate import (
    InterventionSpec,
    NoiseSpec,
    gen_case,
    gen_dag,
    gen_normal,
    gen_scm,
    inject_anomaly,
    load_case,
    write_case,
)
from rcaforge.stats import concat_frames, detect_anomalies


class TestGenDag:
    def test_benchmark_shape(self):
        g = gen_dag(20, 30, seed=1)
        assert len(g.nodes) == 20 and len(g.directed) == 30
        topological_sort(g)

    def test_two_node_single_edge(self):
        g = gen_dag(2, 1, seed=0)
        assert len(g.directed) == 1

    def test_too_many_edges(self):
        with pytest.raises(TooManyEdges):
            gen_dag(3, 4, seed=0)

    def test_deterministic(self):
        assert gen_dag(10, 15, seed=5) == gen_dag(10, 15, seed=5)

    def test_every_generated_graph_sorts(self):
        for seed in range(30):
            topological_sort(gen_dag(12, 20, seed=seed))


class TestGenScm:
    def test_weight_bounds_over_many_seeds(self):
        g = gen_dag(6, 8, seed=0)
        for seed in range(1000):
            scm = gen_scm(g, seed=seed)
            for w in scm.weights.values():
                assert 0.5 <= abs(w) <= 2.0

    def test_empty_graph_has_no_weights(self):
        scm = gen_scm(gen_dag(4, 0, seed=0), seed=1)
        assert scm.weights == {}

    def test_deterministic(self):
        g = gen_dag(5, 6, seed=2)
        assert gen_scm(g, seed=9).weights == gen_scm(g, seed=9).weights

    def test_noise_forms_zero_mean(self):
        g = gen_dag(3, 0, seed=0)
        for form in ("gaussian", "uniform", "exponential"):
            scm = gen_scm(g, noise_form=form, seed=0)
            frame = gen_normal(scm, 5000, seed=1)
            for name in frame.names:
                assert abs(frame.values(name).mean()) < 3 / np.sqrt(5000) * 3


class TestGenNormal:
    def test_zero_weight_scm_gives_independent_columns(self):
        g = gen_dag(6, 8, seed=3)
        scm = gen_scm(g, seed=4)
        scm = type(scm)(
            graph=scm.graph,
            weights={e: 0.0 for e in scm.weights},
            noise=scm.noise,
            intercepts=scm.intercepts,
        )
        frame = gen_normal(scm, 5000, seed=5)
        corr = np.corrcoef(frame.matrix(), rowvar=False)
        np.fill_diagonal(corr, 0.0)
        assert np.abs(corr).max() < 0.1

    def test_root_mean_near_noise_shift(self):
        g = MixedGraph(("r",), frozenset(), frozenset())
        scm = gen_scm(g, seed=0)
        frame = gen_normal(scm, 5000, seed=6)
        assert abs(frame.values("r").mean() - 0.0) < 3 * 1.0 / np.sqrt(5000)

    def test_single_row(self):
        scm = gen_scm(gen_dag(3, 2, seed=0), seed=0)
        assert len(gen_normal(scm, 1, seed=0)) == 1

    def test_no_nan_inf_any_noise_form(self):
        g = gen_dag(10, 20, seed=7)
        for form in ("gaussian", "uniform", "exponential"):
            frame = gen_normal(gen_scm(g, noise_form=form, seed=8), 500, seed=9)
            assert np.isfinite(frame.matrix()).all()

    def test_timestamps_continue_with_t_start(self):
        scm = gen_scm(gen_dag(2, 1, seed=0), seed=0)
        frame = gen_normal(scm, 10, seed=0, t_start=100)
        assert frame.timestamps[0] == 100 and frame.timestamps[-1] == 109


class TestInjectAnomaly:
    def setup_method(self):
        # r -> c with a known weight; unit gaussian noise
        g = MixedGraph(("r", "c"), frozenset({("r", "c")}), frozenset())
        self.scm = gen_scm(g, seed=21)
        self.w = self.scm.weights[("r", "c")]

    def test_mean_shift_propagates_linearly(self):
        spec = InterventionSpec(targets={"r"}, mechanism="mean_shift", magnitude=10.0)
        ab = inject_anomaly(self.scm, spec)
        normal = gen_normal(self.scm, 4000, seed=1)
        abnormal = gen_normal(ab, 4000, seed=2)
        d_root = abnormal.values("r").mean() - normal.values("r").mean()
        d_child = abnormal.values("c").mean() - normal.values("c").mean()
        assert d_root == pytest.approx(10.0, abs=0.2)
        assert d_child == pytest.approx(self.w * 10.0, abs=0.2 * max(1, abs(self.w)))

    def test_variance_scale(self):
        spec = InterventionSpec(targets={"r"}, mechanism="variance_scale", magnitude=4.0)
        ab = inject_anomaly(self.scm, spec)
        assert ab.noise["r"].scale == 4.0 * self.scm.noise["r"].scale
        assert ab.noise["c"] == self.scm.noise["c"]

    def test_weight_rescale_without_parents_flagged(self):
        spec = InterventionSpec(targets={"r"}, mechanism="weight_rescale", magnitude=3.0)
        ab = inject_anomaly(self.scm, spec)
        assert ab.weights == self.scm.weights
        assert ab.metadata["weight_rescale_noop"] == ["r"]

    def test_unknown_target(self):
        with pytest.raises(UnknownNode):
            inject_anomaly(self.scm, InterventionSpec(targets={"nope"}))

    def test_original_untouched(self):
        before = dict(self.scm.noise)
        inject_anomaly(self.scm, InterventionSpec(targets={"r"}))
        assert self.scm.noise == before


class TestGenCase:
    def test_benchmark_shapes(self):
        case = gen_case(num_nodes=20, num_edges=30, n_normal=500, n_abnormal=100, seed=1)
        assert len(case.normal) == 500 and len(case.abnormal) == 100
        assert len(case.scm.graph.nodes) == 20
        assert 1 <= len(case.truth) <= 3
        assert case.abnormal.timestamps[0] == 500

    def test_all_nodes_as_root_causes(self):
        case = gen_case(num_nodes=5, num_edges=6, n_normal=50, n_abnormal=20,
                        n_root_causes=5, seed=2)
        assert case.truth == frozenset(case.scm.graph.nodes)

    def test_same_seed_identical(self):
        a = gen_case(num_nodes=6, num_edges=8, n_normal=100, n_abnormal=30, seed=3)
        b = gen_case(num_nodes=6, num_edges=8, n_normal=100, n_abnormal=30, seed=3)
        assert a.truth == b.truth
        assert a.normal == b.normal and a.abnormal == b.abnormal
        assert a.scm.weights == b.scm.weights

    def test_strong_mean_shift_detectable(self):
        # detector flags the target column in at least 95 of 100 seeded cases
        hits = 0
        for seed in range(100):
            case = gen_case(num_nodes=8, num_edges=12, n_normal=300, n_abnormal=80,
                            n_root_causes=1, magnitude=8.0, seed=seed)
            both = concat_frames(case.normal, case.abnormal)
            spans = detect_anomalies(both, train_fraction=300 / 380, k_sigma=3.0)
            target = next(iter(case.truth))
            if spans[target]:
                hits += 1
        assert hits >= 95


class TestCaseBundle:
    def test_round_trip(self, tmp_path):
        case = gen_case(num_nodes=5, num_edges=6, n_normal=80, n_abnormal=20, seed=4)
        write_case(case, tmp_path / "case")
        for name in ("truth.json", "graph.json", "scm.json", "normal.csv", "abnormal.csv"):
            assert (tmp_path / "case" / name).exists()
        loaded = load_case(tmp_path / "case")
        assert loaded.truth == case.truth
        assert loaded.scm.graph == case.scm.graph
        assert loaded.scm.weights == pytest.approx(case.scm.weights)
        assert loaded.normal == case.normal
        assert loaded.abnormal == case.abnormal

    def test_same_seed_bundles_byte_identical(self, tmp_path):
        for sub in ("one", "two"):
            case = gen_case(num_nodes=4, num_edges=4, n_normal=50, n_abnormal=20, seed=5)
            write_case(case, tmp_path / sub)
        for name in ("truth.json", "graph.json", "scm.json", "normal.csv", "abnormal.csv"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


class TestNoiseSpec:
    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            NoiseSpec(scale=0.0)

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            NoiseSpec(form="cauchy")

    def test_exponential_centered(self):
        g = MixedGraph(("a",), frozenset(), frozenset())
        scm = gen_scm(g, noise_form="exponential", seed=0)
        assert scm.noise["a"].shift == -1.0
