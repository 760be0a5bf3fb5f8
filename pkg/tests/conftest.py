import os

import numpy as np
import pytest

from rcaforge.benchmark import BenchConfig, run_benchmark
from rcaforge.simulate import gen_case
from rcaforge.stats import MetricFrame


def chain_frame(n=5000, seed=42, wx=1.0, wy=1.0):
    """X -> Y -> Z with unit noise; population corr(X,Z) = 1/sqrt(3) at unit weights."""
    rng = np.random.default_rng(seed)
    x = rng.normal(0, 1, n)
    y = wx * x + rng.normal(0, 1, n)
    z = wy * y + rng.normal(0, 1, n)
    return MetricFrame(np.arange(n), {"X": x, "Y": y, "Z": z})


def collider_frame(n=5000, seed=7):
    rng = np.random.default_rng(seed)
    x = rng.normal(0, 1, n)
    y = rng.normal(0, 1, n)
    z = x + y + rng.normal(0, 1, n)
    return MetricFrame(np.arange(n), {"X": x, "Y": y, "Z": z})


@pytest.fixture(scope="session")
def small_case():
    """One strongly intervened seeded case shared by scorer tests."""
    return gen_case(num_nodes=8, num_edges=12, n_normal=1000, n_abnormal=150,
                    n_root_causes=1, magnitude=10.0, seed=11)


@pytest.fixture(scope="session")
def desk_report():
    """The acceptance corpus: 50 cases, seeds 1-50, every method and graph source."""
    cfg = BenchConfig(
        cases=50,
        nodes=20,
        edges=30,
        samples=2000,
        abnormal=200,
        magnitude=10.0,
        root_causes=(1, 3),
        seed_start=1,
        workers=min(4, os.cpu_count() or 1),
    )
    return run_benchmark(cfg)
