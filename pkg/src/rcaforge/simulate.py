"""Ground-truth benchmark generation.

Pipeline: random DAG -> linear SCM with configurable noise -> normal-period
data -> intervention on chosen root-cause nodes -> abnormal-period data.
Every stage is a pure function of its seed, so a whole case is reproducible
from a single integer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import TooManyEdges, UnknownNode
from .graphs import MixedGraph, topological_sort
from .stats import MetricFrame

NOISE_FORMS = ("gaussian", "uniform", "exponential")
MECHANISMS = ("mean_shift", "variance_scale", "weight_rescale")

DEFAULT_WEIGHT_LOW = 0.5
DEFAULT_WEIGHT_HIGH = 2.0
DEFAULT_MAGNITUDE = 10.0


@dataclass(frozen=True)
class NoiseSpec:
    """Exogenous noise of one node: distribution family, scale, and shift.

    gaussian: Normal(shift, scale); uniform: shift + U(-scale, scale);
    exponential: shift + Exp(scale).  Scale always bounds the standard
    deviation, which keeps CLT-style test bounds valid for every form.
    """

    form: str = "gaussian"
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.form not in NOISE_FORMS:
            raise ValueError(f"unknown noise form {self.form!r}")
        if self.scale <= 0:
            raise ValueError("noise scale must be positive")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.form == "gaussian":
            return rng.normal(self.shift, self.scale, size=n)
        if self.form == "uniform":
            return rng.uniform(self.shift - self.scale, self.shift + self.scale, size=n)
        return self.shift + rng.exponential(self.scale, size=n)


@dataclass(frozen=True)
class Scm:
    """Linear structural causal model over a DAG."""

    graph: MixedGraph
    weights: dict
    noise: dict
    intercepts: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if set(self.weights) != set(self.graph.directed):
            raise ValueError("weights must be keyed exactly by the DAG's directed edges")
        missing = set(self.graph.nodes) - set(self.noise)
        if missing:
            raise ValueError(f"nodes without a noise spec: {sorted(missing)}")


@dataclass(frozen=True)
class InterventionSpec:
    """How an incident changes the SCM at the root-cause nodes."""

    targets: frozenset
    mechanism: str = "mean_shift"
    magnitude: float = DEFAULT_MAGNITUDE

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))
        if not self.targets:
            raise ValueError("intervention needs at least one target")
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        if self.magnitude <= 0:
            raise ValueError("magnitude must be positive")


def _node_names(num_nodes: int) -> list[str]:
    width = max(2, len(str(num_nodes - 1)))
    return [f"M{i:0{width}d}" for i in range(num_nodes)]


def gen_dag(num_nodes: int, num_edges: int, seed: int = 0) -> MixedGraph:
    """Random DAG with exactly ``num_edges`` edges.

    Draws a uniform random topological permutation of the nodes, then
    samples edges uniformly without replacement among the pairs that
    respect it.
    """
    max_edges = num_nodes * (num_nodes - 1) // 2
    if num_edges > max_edges:
        raise TooManyEdges(f"{num_edges} edges requested, max {max_edges} for {num_nodes} nodes")
    names = _node_names(num_nodes)
    rng = np.random.default_rng(seed)
    order = rng.permutation(num_nodes)
    pairs = [
        (names[order[i]], names[order[j]])
        for i in range(num_nodes)
        for j in range(i + 1, num_nodes)
    ]
    chosen = rng.choice(len(pairs), size=num_edges, replace=False)
    edges = frozenset(pairs[i] for i in sorted(chosen))
    return MixedGraph(tuple(names), edges, frozenset())


def gen_scm(
    g: MixedGraph,
    weight_low: float = DEFAULT_WEIGHT_LOW,
    weight_high: float = DEFAULT_WEIGHT_HIGH,
    noise_form: str = "gaussian",
    seed: int = 0,
) -> Scm:
    """Draw edge weights uniformly from +/-[weight_low, weight_high].

    Intercepts are zero and every node gets unit-scale noise of the given
    form.  Exponential noise is shifted by -scale so all forms are zero-mean.
    """
    if not 0 < weight_low <= weight_high:
        raise ValueError("need 0 < weight_low <= weight_high")
    rng = np.random.default_rng(seed)
    weights = {}
    for edge in sorted(g.directed):
        magnitude = rng.uniform(weight_low, weight_high)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        weights[edge] = float(sign * magnitude)
    shift = -1.0 if noise_form == "exponential" else 0.0
    noise = {v: NoiseSpec(form=noise_form, scale=1.0, shift=shift) for v in g.nodes}
    intercepts = {v: 0.0 for v in g.nodes}
    return Scm(graph=g, weights=weights, noise=noise, intercepts=intercepts)


def gen_normal(scm: Scm, n: int, seed: int = 0, t_start: int = 0) -> MetricFrame:
    """Sample n rows from the SCM in topological order.

    x_v = intercept_v + sum_p w_(p,v) * x_p + noise_v; timestamps run from
    ``t_start``.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    order = topological_sort(scm.graph)
    values: dict[str, np.ndarray] = {}
    for v in order:
        x = scm.noise[v].sample(n, rng) + scm.intercepts[v]
        for p in sorted(scm.graph.parents(v)):
            x = x + scm.weights[(p, v)] * values[p]
        values[v] = x
    columns = {v: values[v] for v in scm.graph.nodes}
    return MetricFrame(np.arange(t_start, t_start + n, dtype=np.int64), columns)


def inject_anomaly(scm: Scm, spec: InterventionSpec) -> Scm:
    """Return a copy of the SCM with the intervention applied to the targets.

    mean_shift adds magnitude * scale to the target's noise shift;
    variance_scale multiplies the noise scale; weight_rescale multiplies all
    incoming weights (a no-op on parentless targets, noted in metadata).
    """
    unknown = spec.targets - set(scm.graph.nodes)
    if unknown:
        raise UnknownNode(f"intervention targets not in graph: {sorted(unknown)}")
    noise = dict(scm.noise)
    weights = dict(scm.weights)
    metadata = dict(scm.metadata)
    noop: list[str] = []
    for t in sorted(spec.targets):
        spec_t = noise[t]
        if spec.mechanism == "mean_shift":
            noise[t] = replace(spec_t, shift=spec_t.shift + spec.magnitude * spec_t.scale)
        elif spec.mechanism == "variance_scale":
            noise[t] = replace(spec_t, scale=spec_t.scale * spec.magnitude)
        else:  # weight_rescale
            incoming = [(p, c) for (p, c) in weights if c == t]
            if not incoming:
                noop.append(t)
            for edge in incoming:
                weights[edge] = weights[edge] * spec.magnitude
    if noop:
        metadata["weight_rescale_noop"] = noop
    metadata["intervention"] = {
        "targets": sorted(spec.targets),
        "mechanism": spec.mechanism,
        "magnitude": spec.magnitude,
    }
    return Scm(
        graph=scm.graph,
        weights=weights,
        noise=noise,
        intercepts=dict(scm.intercepts),
        metadata=metadata,
    )


@dataclass(frozen=True)
class Case:
    """One generated benchmark case: SCM, ground truth, and both frames."""

    scm: Scm
    abnormal_scm: Scm
    truth: frozenset
    normal: MetricFrame
    abnormal: MetricFrame
    mechanism: str
    magnitude: float
    seed: int


def gen_case(
    num_nodes: int = 20,
    num_edges: int = 30,
    n_normal: int = 2000,
    n_abnormal: int = 500,
    n_root_causes: int | tuple[int, int] = (1, 3),
    mechanism: str = "mean_shift",
    magnitude: float = DEFAULT_MAGNITUDE,
    noise_form: str = "gaussian",
    seed: int = 0,
) -> Case:
    """Compose dag -> scm -> normal data -> intervention -> abnormal data.

    ``n_root_causes`` may be a fixed count or an inclusive (low, high) range
    sampled per case.  Abnormal timestamps continue after the normal ones.
    Fully deterministic given the arguments.
    """
    ss = np.random.SeedSequence(seed)
    s_dag, s_scm, s_norm, s_targets, s_ab = (int(c.generate_state(1)[0]) for c in ss.spawn(5))
    graph = gen_dag(num_nodes, num_edges, seed=s_dag)
    scm = gen_scm(graph, noise_form=noise_form, seed=s_scm)
    normal = gen_normal(scm, n_normal, seed=s_norm)
    rng = np.random.default_rng(s_targets)
    if isinstance(n_root_causes, tuple):
        lo, hi = n_root_causes
        k = int(rng.integers(lo, hi + 1))
    else:
        k = int(n_root_causes)
    if not 1 <= k <= num_nodes:
        raise ValueError(f"root-cause count {k} outside [1, {num_nodes}]")
    targets = frozenset(rng.choice(graph.nodes, size=k, replace=False).tolist())
    spec = InterventionSpec(targets=targets, mechanism=mechanism, magnitude=magnitude)
    abnormal_scm = inject_anomaly(scm, spec)
    abnormal = gen_normal(abnormal_scm, n_abnormal, seed=s_ab, t_start=n_normal)
    return Case(
        scm=scm,
        abnormal_scm=abnormal_scm,
        truth=targets,
        normal=normal,
        abnormal=abnormal,
        mechanism=mechanism,
        magnitude=magnitude,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# case bundles on disk
# ---------------------------------------------------------------------------


def scm_to_json_dict(scm: Scm) -> dict:
    return {
        "weights": [[p, c, w] for (p, c), w in sorted(scm.weights.items())],
        "noise": {
            v: {"form": s.form, "scale": s.scale, "shift": s.shift}
            for v, s in sorted(scm.noise.items())
        },
        "intercepts": {v: scm.intercepts[v] for v in sorted(scm.intercepts)},
        "metadata": scm.metadata,
    }


def scm_from_json_dict(doc: Mapping, graph: MixedGraph) -> Scm:
    return Scm(
        graph=graph,
        weights={(p, c): float(w) for p, c, w in doc["weights"]},
        noise={
            v: NoiseSpec(form=s["form"], scale=s["scale"], shift=s["shift"])
            for v, s in doc["noise"].items()
        },
        intercepts={v: float(x) for v, x in doc["intercepts"].items()},
        metadata=dict(doc.get("metadata", {})),
    )


def write_case(case: Case, directory: str | Path) -> Path:
    """Write truth.json, graph.json, scm.json, normal.csv, abnormal.csv."""
    from .io import write_metrics  # local import: io depends on stats only

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    truth = {
        "targets": sorted(case.truth),
        "mechanism": case.mechanism,
        "magnitude": case.magnitude,
        "seed": case.seed,
        "n_normal": len(case.normal),
        "n_abnormal": len(case.abnormal),
    }
    (directory / "truth.json").write_text(json.dumps(truth, indent=2) + "\n")
    (directory / "graph.json").write_text(case.scm.graph.to_json())
    (directory / "scm.json").write_text(json.dumps(scm_to_json_dict(case.scm), indent=2) + "\n")
    write_metrics(case.normal, directory / "normal.csv")
    write_metrics(case.abnormal, directory / "abnormal.csv")
    return directory


def load_case(directory: str | Path) -> Case:
    from .io import load_metrics

    directory = Path(directory)
    truth = json.loads((directory / "truth.json").read_text())
    graph = MixedGraph.from_json((directory / "graph.json").read_text())
    scm = scm_from_json_dict(json.loads((directory / "scm.json").read_text()), graph)
    spec = InterventionSpec(
        targets=frozenset(truth["targets"]),
        mechanism=truth["mechanism"],
        magnitude=truth["magnitude"],
    )
    return Case(
        scm=scm,
        abnormal_scm=inject_anomaly(scm, spec),
        truth=frozenset(truth["targets"]),
        normal=load_metrics(directory / "normal.csv"),
        abnormal=load_metrics(directory / "abnormal.csv"),
        mechanism=truth["mechanism"],
        magnitude=truth["magnitude"],
        seed=truth["seed"],
    )
