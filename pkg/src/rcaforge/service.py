"""HTTP job service backing the dashboard.

Artifacts (frames, knowledge docs, graphs, results, reports) are
content-addressed files on disk; jobs run asynchronously on a bounded
thread pool and write their outputs through the same serializers the CLI
uses, so artifacts are byte-identical for identical inputs and seeds.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, UploadFile
from fastapi.responses import JSONResponse, Response


from . import io
from .benchmark import BenchConfig, run_benchmark, report_to_json
from .discovery import GesConfig, PcConfig, ges_discover, pc_discover
from .errors import KnowledgeConflict, RcaError
from .graphs import EMPTY_KNOWLEDGE
from .scoring import (
    ScoringContext,
    bayesian_scores,
    epsilon_diagnosis,
    ht_scores,
    random_walk_scores,
    rcd_scores,
)
from .stats import detect_anomalies

DATA_DIR_ENV = "RCA_FORGE_DATA_DIR"
MEDIA_TYPES = {
    ".csv": "text/csv",
    ".json": "application/json",
    ".yaml": "application/x-yaml",
}
JOB_KINDS = ("discover", "score", "detect", "bench")


@dataclass
class Job:
    id: str
    kind: str
    state: str = "queued"  # queued -> running -> done | failed
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    output: str | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "inputs": self.inputs,
            "params": self.params,
            "output": self.output,
            "error": self.error,
        }


class ArtifactStore:
    """Content-addressed immutable files plus a tiny metadata sidecar."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, content: bytes, suffix: str, kind: str) -> str:
        artifact_id = hashlib.sha256(content).hexdigest()[:24]
        path = self.root / f"{artifact_id}{suffix}"
        if not path.exists():
            path.write_bytes(content)
            meta = {"id": artifact_id, "suffix": suffix, "kind": kind}
            (self.root / f"{artifact_id}.meta.json").write_text(json.dumps(meta))
        return artifact_id

    def meta(self, artifact_id: str) -> dict:
        path = self.root / f"{artifact_id}.meta.json"
        if not path.exists():
            raise KeyError(artifact_id)
        return json.loads(path.read_text())

    def get(self, artifact_id: str) -> tuple[bytes, str]:
        meta = self.meta(artifact_id)
        path = self.root / f"{artifact_id}{meta['suffix']}"
        return path.read_bytes(), meta["suffix"]


def _error_payload(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "detail": str(exc)}


def create_app(data_dir: str | None = None, max_jobs: int | None = None,
               static_dir: str | None = None) -> FastAPI:
    root = Path(data_dir or os.environ.get(DATA_DIR_ENV) or Path.cwd() / "rcaforge-data")
    store = ArtifactStore(root)
    jobs: dict[str, Job] = {}
    lock = threading.Lock()
    pool = ThreadPoolExecutor(max_workers=max_jobs or os.cpu_count() or 2)

    app = FastAPI(title="rcaforge", version="0.1.0")

    @app.exception_handler(RcaError)
    async def _rca_error(request, exc):
        status = 409 if isinstance(exc, KnowledgeConflict) else 422
        return JSONResponse(status_code=status, content=_error_payload(exc))

    def _load_frame(artifact_id: str):
        try:
            content, suffix = store.get(artifact_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown artifact {artifact_id}")
        if suffix != ".csv":
            raise HTTPException(status_code=422, detail=f"artifact {artifact_id} is not a metric CSV")
        return io.load_metrics(content)

    def _load_graph(artifact_id: str):
        try:
            content, _ = store.get(artifact_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown artifact {artifact_id}")
        return io.load_graph_text(content.decode("utf-8"))

    # -- artifacts ---------------------------------------------------------

    @app.post("/api/upload")
    async def upload(file: UploadFile = File(...), kind: str = Form("metrics")):
        content = await file.read()
        if kind == "metrics":
            frame = io.load_metrics(content)
            artifact_id = store.put(content, ".csv", "metrics")
            return {"artifact_id": artifact_id, "kind": kind,
                    "rows": len(frame), "metrics": list(frame.names)}
        if kind == "knowledge":
            knowledge = io.parse_knowledge(content.decode("utf-8"))
            artifact_id = store.put(content, ".yaml", "knowledge")
            return {"artifact_id": artifact_id, "kind": kind,
                    "forbids": len(knowledge.forbidden), "requires": len(knowledge.required)}
        raise HTTPException(status_code=422, detail=f"unknown upload kind {kind!r}")

    @app.get("/api/artifacts/{artifact_id}")
    def download(artifact_id: str):
        try:
            content, suffix = store.get(artifact_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown artifact {artifact_id}")
        return Response(content=content, media_type=MEDIA_TYPES.get(suffix, "application/octet-stream"))

    @app.get("/api/frames/{artifact_id}/summary")
    def frame_summary(artifact_id: str):
        frame = _load_frame(artifact_id)
        summary = {}
        for name in frame.names:
            col = frame.values(name)
            summary[name] = {
                "count": int(col.size),
                "mean": float(col.mean()),
                "std": float(col.std()),
                "min": float(col.min()),
                "max": float(col.max()),
            }
        return {"rows": len(frame), "metrics": summary}

    # -- jobs --------------------------------------------------------------

    def _run_job(job: Job) -> str:
        params = job.params
        if job.kind == "detect":
            frame = _load_frame(job.inputs["frame"])
            spans = detect_anomalies(
                frame,
                train_fraction=float(params.get("train_fraction", 0.5)),
                k_sigma=float(params.get("k_sigma", 3.0)),
            )
            doc = {
                name: [
                    {"start_index": s.start_index, "end_index": s.end_index,
                     "peak_score": s.peak_score}
                    for s in span_list
                ]
                for name, span_list in spans.items()
            }
            return store.put(io.to_canonical_json(doc).encode(), ".json", "anomalies")

        if job.kind == "discover":
            frame = _load_frame(job.inputs["frame"])
            knowledge = EMPTY_KNOWLEDGE
            if job.inputs.get("knowledge"):
                content, _ = store.get(job.inputs["knowledge"])
                knowledge = io.parse_knowledge(content.decode("utf-8"))
            algo = params.get("algo", "pc")
            if algo == "pc":
                graph = pc_discover(frame, knowledge, PcConfig(
                    alpha=float(params.get("alpha", 0.05)),
                    max_cond_size=int(params.get("max_cond_size", 3)),
                ))
            elif algo == "ges":
                if "max_parents" in params:
                    cap = params["max_parents"]
                    cfg = GesConfig(max_parents=int(cap) if cap is not None else None)
                else:
                    cfg = GesConfig()
                graph = ges_discover(frame, knowledge, cfg)
            else:
                raise ValueError(f"unknown algorithm {algo!r}")
            return store.put(graph.to_json().encode(), ".json", "graph")

        if job.kind == "score":
            normal = _load_frame(job.inputs["normal"])
            abnormal = _load_frame(job.inputs["abnormal"])
            graph = _load_graph(job.inputs["graph"]) if job.inputs.get("graph") else None
            ctx = ScoringContext(
                normal=normal, abnormal=abnormal, graph=graph,
                anomalous_metrics=frozenset(normal.names),
            )
            method = params.get("method", "ht")
            seed = int(params.get("seed", 0))
            if method == "rw":
                result = random_walk_scores(ctx, seed=seed)
            elif method == "ht":
                result = ht_scores(ctx, adjust=False)
            elif method == "ht-adj":
                result = ht_scores(ctx, adjust=True)
            elif method == "bi":
                result = bayesian_scores(ctx)
            elif method == "eps":
                result = epsilon_diagnosis(ctx, seed=seed)
            elif method == "rcd":
                result = rcd_scores(ctx, localized=False)
            elif method == "rcd-local":
                result = rcd_scores(ctx, localized=True)
            else:
                raise ValueError(f"unknown method {method!r}")
            return store.put(io.result_to_json(result).encode(), ".json", "result")

        if job.kind == "bench":
            allowed = {f.name for f in BenchConfig.__dataclass_fields__.values()}
            kwargs = {k: v for k, v in params.items() if k in allowed}
            for key in ("methods", "graphs", "root_causes"):
                if key in kwargs and isinstance(kwargs[key], list):
                    kwargs[key] = tuple(kwargs[key])
            report = run_benchmark(BenchConfig(**kwargs))
            return store.put(report_to_json(report).encode(), ".json", "report")

        raise ValueError(f"unknown job kind {job.kind!r}")

    def _execute(job_id: str):
        with lock:
            job = jobs[job_id]
            job.state = "running"
        try:
            output = _run_job(job)
        except HTTPException as exc:
            with lock:
                job.state = "failed"
                job.error = str(exc.detail)
            return
        except Exception as exc:
            with lock:
                job.state = "failed"
                job.error = f"{type(exc).__name__}: {exc}"
            return
        with lock:
            job.state = "done"
            job.output = output

    @app.post("/api/jobs")
    def submit_job(body: dict):
        kind = body.get("kind")
        if kind not in JOB_KINDS:
            raise HTTPException(status_code=422, detail=f"kind must be one of {JOB_KINDS}")
        inputs = body.get("inputs", {}) or {}
        for name, artifact_id in inputs.items():
            if artifact_id is None:
                continue
            try:
                store.meta(artifact_id)
            except KeyError:
                raise HTTPException(status_code=404,
                                    detail=f"unknown artifact {artifact_id} for input {name!r}")
        job = Job(id=uuid.uuid4().hex[:16], kind=kind, inputs=inputs,
                  params=body.get("params", {}) or {})
        with lock:
            jobs[job.id] = job
        pool.submit(_execute, job.id)
        return {"job_id": job.id, "state": job.state}

    @app.get("/api/jobs/{job_id}")
    def job_state(job_id: str):
        with lock:
            job = jobs.get(job_id)
            if job is None:
                raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
            return job.to_dict()

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")

    return app
