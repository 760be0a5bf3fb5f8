"""Drive the HTTP job service the way the dashboard does.

The service stores uploads as content-addressed artifacts, runs jobs on a
bounded worker pool, and serves every result for download.  This demo uses
the in-process test client; `rcaforge serve --bind 127.0.0.1:8000` exposes
the same API over the network.
"""

import tempfile
import time

from fastapi.testclient import TestClient

from rcaforge.io import dump_metrics
from rcaforge.service import create_app
from rcaforge.simulate import gen_case

case = gen_case(num_nodes=8, num_edges=12, n_normal=800, n_abnormal=150, seed=7)
client = TestClient(create_app(data_dir=tempfile.mkdtemp(prefix="rcaforge-demo-")))


def upload(name, text):
    response = client.post("/api/upload",
                           files={"file": (name, text.encode(), "text/csv")},
                           data={"kind": "metrics"})
    response.raise_for_status()
    return response.json()["artifact_id"]


def run_job(kind, inputs, params):
    job_id = client.post("/api/jobs", json={
        "kind": kind, "inputs": inputs, "params": params}).json()["job_id"]
    while True:
        doc = client.get(f"/api/jobs/{job_id}").json()
        if doc["state"] in ("done", "failed"):
            return doc
        time.sleep(0.05)


normal_id = upload("normal.csv", dump_metrics(case.normal))
abnormal_id = upload("abnormal.csv", dump_metrics(case.abnormal))
print(f"uploaded frames: {normal_id[:12]}... and {abnormal_id[:12]}...")

summary = client.get(f"/api/frames/{normal_id}/summary").json()
first = sorted(summary["metrics"])[0]
print(f"summary: {summary['rows']} rows; {first} mean={summary['metrics'][first]['mean']:.2f}")

discover = run_job("discover", {"frame": normal_id}, {"algo": "pc", "alpha": 0.05})
print(f"discover job: {discover['state']}, graph artifact {discover['output'][:12]}...")

score = run_job(
    "score",
    {"normal": normal_id, "abnormal": abnormal_id, "graph": discover["output"]},
    {"method": "ht", "seed": 7},
)
ranking = client.get(f"/api/artifacts/{score['output']}").json()
top = ranking["ranked"][0]["metric"]
print(f"score job: top candidate {top} "
      f"(true root causes: {sorted(case.truth)}; hit: {top in case.truth})")
