"""Disk and wire formats: metric CSV, knowledge YAML, result/graph JSON.

Serializers here are the single source of truth for every byte the CLI and
the HTTP service emit, which is what makes their artifacts byte-identical
for the same seed.
"""

from __future__ import annotations

import csv
import io as _io
import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from .errors import (
    KnowledgeConflict,
    NonMonotonicTimestamps,
    NonNumericCell,
    ParseError,
    SchemaError,
)
from .graphs import DomainKnowledge, MixedGraph
from .stats import MetricFrame

KNOWLEDGE_KEYS = ("forbids", "requires", "root-nodes", "leaf-nodes")


def _parse_timestamp(cell: str, row: int) -> int:
    cell = cell.strip()
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(cell.replace("Z", "+00:00"))
    except ValueError:
        raise ParseError(
            f"row {row}: timestamp {cell!r} is neither integer seconds nor ISO-8601",
            row=row,
            column="timestamp",
        ) from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def load_metrics(src) -> MetricFrame:
    """Parse a metric CSV (path, bytes, or text).

    First column must be ``timestamp`` (integer epoch seconds or ISO-8601);
    remaining columns are real-valued metrics.  Errors carry the offending
    row (1-based, header excluded) and column.
    """
    if isinstance(src, bytes):
        text = src.decode("utf-8")
    elif isinstance(src, Path) or (isinstance(src, str) and "\n" not in src):
        text = Path(src).read_text()
    else:
        text = src
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise ParseError("empty document")
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "timestamp":
        raise ParseError("first column must be 'timestamp'", row=0, column=header[0] if header else None)
    names = header[1:]
    if not names:
        raise ParseError("no metric columns")
    if len(set(names)) != len(names):
        raise ParseError("duplicate metric names in header")
    if len(rows) < 2:
        raise ParseError("need at least one data row")

    timestamps: list[int] = []
    columns: dict[str, list[float]] = {n: [] for n in names}
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise ParseError(f"row {i}: expected {len(header)} cells, got {len(row)}", row=i)
        ts = _parse_timestamp(row[0], i)
        if timestamps and ts <= timestamps[-1]:
            raise NonMonotonicTimestamps(
                f"row {i}: timestamp {ts} not greater than previous {timestamps[-1]}",
                row=i,
                column="timestamp",
            )
        timestamps.append(ts)
        for name, cell in zip(names, row[1:]):
            try:
                value = float(cell)
            except ValueError:
                raise NonNumericCell(
                    f"row {i}, column {name!r}: {cell.strip()!r} is not a number",
                    row=i,
                    column=name,
                ) from None
            if not np.isfinite(value):
                raise NonNumericCell(
                    f"row {i}, column {name!r}: non-finite value", row=i, column=name
                )
            columns[name].append(value)
    return MetricFrame(np.array(timestamps, dtype=np.int64), {n: np.array(v) for n, v in columns.items()})


def dump_metrics(frame: MetricFrame) -> str:
    """MetricFrame -> CSV text; floats via repr so parsing round-trips."""
    buf = _io.StringIO()
    buf.write("timestamp," + ",".join(frame.names) + "\n")
    cols = [frame.values(n) for n in frame.names]
    for i, ts in enumerate(frame.timestamps):
        buf.write(str(int(ts)) + "," + ",".join(repr(float(c[i])) for c in cols) + "\n")
    return buf.getvalue()


def write_metrics(frame: MetricFrame, path) -> None:
    Path(path).write_text(dump_metrics(frame))


# ---------------------------------------------------------------------------
# knowledge documents
# ---------------------------------------------------------------------------


def _pair_list(doc, key) -> frozenset:
    raw = doc.get(key) or []
    if not isinstance(raw, list):
        raise SchemaError(f"{key!r} must be a list of [cause, effect] pairs")
    pairs = set()
    for item in raw:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise SchemaError(f"{key!r} entry {item!r} is not a [cause, effect] pair")
        a, b = item
        if not isinstance(a, str) or not isinstance(b, str):
            raise SchemaError(f"{key!r} entry {item!r} must hold two names")
        pairs.add((a, b))
    return frozenset(pairs)


def _name_list(doc, key) -> frozenset:
    raw = doc.get(key) or []
    if not isinstance(raw, list) or not all(isinstance(x, str) for x in raw):
        raise SchemaError(f"{key!r} must be a list of names")
    return frozenset(raw)


def parse_knowledge(text: str) -> DomainKnowledge:
    """Parse a YAML knowledge document.

    Top-level keys (all optional): ``forbids``, ``requires`` (lists of
    [cause, effect] pairs), ``root-nodes``, ``leaf-nodes`` (lists of names).
    Unknown keys raise SchemaError; contradictory constraints raise
    KnowledgeConflict.
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"invalid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise SchemaError("knowledge document must be a mapping")
    unknown = set(doc) - set(KNOWLEDGE_KEYS)
    if unknown:
        raise SchemaError(f"unknown keys: {sorted(unknown)}; expected {list(KNOWLEDGE_KEYS)}")
    return DomainKnowledge(
        forbidden=_pair_list(doc, "forbids"),
        required=_pair_list(doc, "requires"),
        root_nodes=_name_list(doc, "root-nodes"),
        leaf_nodes=_name_list(doc, "leaf-nodes"),
    )


def dump_knowledge(k: DomainKnowledge) -> str:
    doc = {
        "forbids": [list(p) for p in sorted(k.forbidden)],
        "requires": [list(p) for p in sorted(k.required)],
        "root-nodes": sorted(k.root_nodes),
        "leaf-nodes": sorted(k.leaf_nodes),
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def load_knowledge(path) -> DomainKnowledge:
    return parse_knowledge(Path(path).read_text())


# ---------------------------------------------------------------------------
# graph / result JSON files
# ---------------------------------------------------------------------------


def load_graph(path) -> MixedGraph:
    return MixedGraph.from_json(Path(path).read_text())


def load_graph_text(text: str) -> MixedGraph:
    return MixedGraph.from_json(text)


def write_graph(g: MixedGraph, path) -> None:
    Path(path).write_text(g.to_json())


def result_to_json(result) -> str:
    return json.dumps(result.to_json_dict(), indent=2, sort_keys=False, default=_jsonable) + "\n"


def write_result(result, path) -> None:
    Path(path).write_text(result_to_json(result))


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def to_canonical_json(doc) -> str:
    """Stable JSON used for artifacts that must be byte-reproducible."""
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"
