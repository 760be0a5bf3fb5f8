/** Wire types mirroring the rcaforge HTTP API documents. */

export interface GraphDoc {
  nodes: string[];
  directed: [string, string][];
  undirected: [string, string][];
}

export interface MetricSummary {
  count: number;
  mean: number;
  std: number;
  min: number;
  max: number;
}

export interface FrameSummary {
  rows: number;
  metrics: Record<string, MetricSummary>;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobDoc {
  id: string;
  kind: string;
  state: JobState;
  inputs: Record<string, string | null>;
  params: Record<string, unknown>;
  output: string | null;
  error: string | null;
}

export interface RankedEntry {
  metric: string;
  score: number;
}

export interface RcaResultDoc {
  method: string;
  ranked: RankedEntry[];
  metadata: Record<string, unknown>;
}

export interface SpanDoc {
  start_index: number;
  end_index: number;
  peak_score: number;
}

export type SpansDoc = Record<string, SpanDoc[]>;

export interface UploadResponse {
  artifact_id: string;
  kind: string;
  rows?: number;
  metrics?: string[];
}
