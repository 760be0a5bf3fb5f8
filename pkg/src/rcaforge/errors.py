"""Exception hierarchy shared across the library.

Every error raised by rcaforge derives from :class:`RcaError`, so callers
(CLI, service) can distinguish validation failures from genuine bugs.
"""


class RcaError(Exception):
    """Base class for all rcaforge errors."""


class CycleError(RcaError):
    """A directed cycle was found where a DAG is required."""


class MixedEdgeError(RcaError):
    """Undirected edges remain where a fully directed graph is required."""


class UnknownNode(RcaError):
    """A referenced node is not part of the graph."""


class KnowledgeConflict(RcaError):
    """Domain-knowledge constraints contradict each other."""


class SingularData(RcaError):
    """A covariance (sub)matrix is not invertible even after ridge damping."""


class InsufficientData(RcaError):
    """Not enough samples to run a statistical test."""


class TooManyEdges(RcaError):
    """More edges requested than the acyclicity constraint allows."""


class GraphRequired(RcaError):
    """A two-phase scorer was called without a causal graph."""


class NodeMismatch(RcaError):
    """Two graphs being compared do not share the same node set."""


class ParseError(RcaError):
    """A data or config document could not be parsed.

    ``row`` and ``column`` (when not None) locate the offending cell;
    ``row`` counts data rows from 1, header excluded.
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class NonMonotonicTimestamps(ParseError):
    """Timestamps are not strictly increasing."""


class NonNumericCell(ParseError):
    """A metric cell could not be parsed as a real number."""


class SchemaError(RcaError):
    """A structured document has an unknown key or a malformed value."""
