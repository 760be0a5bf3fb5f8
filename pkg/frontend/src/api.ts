/** Thin fetch client for the rcaforge job service.
 *
 * The dashboard computes nothing itself: every number it renders comes
 * back from one of these calls.
 */

import type {
  FrameSummary,
  JobDoc,
  SpansDoc,
  UploadResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    public detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

async function throwApiError(response: Response): Promise<never> {
  let name = `HTTP ${response.status}`;
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (typeof body.error === "string") name = body.error;
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(response.status, name, detail);
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) await throwApiError(response);
    return response;
  }

  private async upload(kind: string, name: string, text: string): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", new Blob([text]), name);
    form.append("kind", kind);
    const response = await this.request("/api/upload", { method: "POST", body: form });
    return response.json();
  }

  uploadMetrics(name: string, csvText: string): Promise<UploadResponse> {
    return this.upload("metrics", name, csvText);
  }

  uploadKnowledge(name: string, yamlText: string): Promise<UploadResponse> {
    return this.upload("knowledge", name, yamlText);
  }

  async submitJob(
    kind: string,
    inputs: Record<string, string>,
    params: Record<string, unknown>,
  ): Promise<string> {
    const response = await this.request("/api/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ kind, inputs, params }),
    });
    const doc = await response.json();
    return doc.job_id;
  }

  async job(id: string): Promise<JobDoc> {
    const response = await this.request(`/api/jobs/${id}`);
    return response.json();
  }

  /** Poll until the job settles; a failed job surfaces its error name. */
  async waitForJob(id: string, pollMs = 150, timeoutMs = 120_000): Promise<JobDoc> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const doc = await this.job(id);
      if (doc.state === "done") return doc;
      if (doc.state === "failed") {
        const [name, ...rest] = (doc.error ?? "JobFailed").split(":");
        throw new ApiError(500, name.trim(), rest.join(":").trim());
      }
      if (Date.now() > deadline) throw new ApiError(408, "Timeout", `job ${id} still ${doc.state}`);
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }

  async artifactText(id: string): Promise<string> {
    const response = await this.request(`/api/artifacts/${id}`);
    return response.text();
  }

  async artifactJson<T>(id: string): Promise<T> {
    return JSON.parse(await this.artifactText(id)) as T;
  }

  async frameSummary(id: string): Promise<FrameSummary> {
    const response = await this.request(`/api/frames/${id}/summary`);
    return response.json();
  }

  async detect(frameId: string, kSigma: number, trainFraction: number): Promise<SpansDoc> {
    const jobId = await this.submitJob("detect", { frame: frameId }, {
      k_sigma: kSigma,
      train_fraction: trainFraction,
    });
    const job = await this.waitForJob(jobId);
    return this.artifactJson<SpansDoc>(job.output as string);
  }
}
