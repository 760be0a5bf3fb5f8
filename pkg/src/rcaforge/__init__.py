"""rcaforge: root-cause analysis for multivariate metric telemetry.

The package splits into:

- graphs      mixed causal graphs, orientation rules, domain knowledge
- stats       correlations, CI tests, two-sample statistics, detector
- simulate    ground-truth DAG/SCM/data generation with anomaly injection
- discovery   PC and greedy-BIC causal graph construction
- scoring     five root-cause ranking methods
- evaluation  graph accuracy and Recall@k metrics
- benchmark   the simulate -> discover -> score -> aggregate harness
- io          CSV/YAML/JSON formats shared by the CLI and the service
- service     HTTP job API backing the dashboard
- cli         command-line entry points
"""

from .errors import (
    CycleError,
    GraphRequired,
    InsufficientData,
    KnowledgeConflict,
    MixedEdgeError,
    NodeMismatch,
    NonMonotonicTimestamps,
    NonNumericCell,
    ParseError,
    RcaError,
    SchemaError,
    SingularData,
    TooManyEdges,
    UnknownNode,
)
from .graphs import DomainKnowledge, MixedGraph, SepsetMap
from .stats import AnomalySpan, CiTestResult, MetricFrame
from .simulate import Case, InterventionSpec, NoiseSpec, Scm
from .scoring import RcaResult, ScoringContext
from .evaluation import GraphScore

__version__ = "0.1.0"

__all__ = [
    "AnomalySpan",
    "Case",
    "CiTestResult",
    "CycleError",
    "DomainKnowledge",
    "GraphRequired",
    "GraphScore",
    "InsufficientData",
    "InterventionSpec",
    "KnowledgeConflict",
    "MetricFrame",
    "MixedEdgeError",
    "MixedGraph",
    "NodeMismatch",
    "NoiseSpec",
    "NonMonotonicTimestamps",
    "NonNumericCell",
    "ParseError",
    "RcaError",
    "RcaResult",
    "SchemaError",
    "Scm",
    "ScoringContext",
    "SepsetMap",
    "SingularData",
    "TooManyEdges",
    "UnknownNode",
    "__version__",
]
