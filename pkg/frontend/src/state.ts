/** Per-tab session: selected artifacts, the knowledge draft, job lifecycle.
 *
 * Invariants: at most one job in flight ("Run" is disabled while one
 * runs); the dirty flag is set by knowledge edits and cleared only by a
 * completed discovery run; edits are undoable until that run completes.
 */

import { ApiClient } from "./api.js";
import { emptyDraft, toYaml, type KnowledgeDraft } from "./knowledge.js";
import type { GraphDoc, RcaResultDoc, SpansDoc } from "./types.js";

export interface DiscoveryParams {
  algo: "pc" | "ges";
  alpha?: number;
  max_cond_size?: number;
  max_parents?: number;
}

export class SessionState {
  frameId: string | null = null; // normal-period frame artifact
  abnormalFrameId: string | null = null;
  knowledge: KnowledgeDraft = emptyDraft();
  dirty = false;
  running = false;
  lastDiscoveryJob: string | null = null;
  graphArtifactId: string | null = null;
  knowledgeArtifactId: string | null = null;
  graph: GraphDoc | null = null;
  lastScoreJob: string | null = null;
  ranking: RcaResultDoc | null = null;

  private undoStack: KnowledgeDraft[] = [];

  constructor(private api: ApiClient) {}

  get runDisabled(): boolean {
    return this.running;
  }

  editKnowledge(next: KnowledgeDraft): void {
    this.undoStack.push(this.knowledge);
    this.knowledge = next;
    this.dirty = true;
  }

  undoKnowledge(): boolean {
    const previous = this.undoStack.pop();
    if (previous === undefined) return false;
    this.knowledge = previous;
    this.dirty = this.undoStack.length > 0;
    return true;
  }

  knowledgeYaml(): string {
    return toYaml(this.knowledge);
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T> {
    if (this.running) throw new Error("a job is already running for this session");
    this.running = true;
    try {
      return await work();
    } finally {
      this.running = false;
    }
  }

  /** Submit a discovery job with the current knowledge draft. */
  async runDiscovery(params: DiscoveryParams): Promise<GraphDoc> {
    if (this.frameId === null) throw new Error("upload a metric frame first");
    return this.guarded(async () => {
      const inputs: Record<string, string> = { frame: this.frameId as string };
      const upload = await this.api.uploadKnowledge("knowledge.yaml", this.knowledgeYaml());
      this.knowledgeArtifactId = upload.artifact_id;
      inputs.knowledge = upload.artifact_id;
      const jobId = await this.api.submitJob("discover", inputs, { ...params });
      this.lastDiscoveryJob = jobId;
      const job = await this.api.waitForJob(jobId);
      this.graphArtifactId = job.output;
      this.graph = await this.api.artifactJson<GraphDoc>(job.output as string);
      this.dirty = false; // only a completed run clears it
      this.undoStack = [];
      return this.graph;
    });
  }

  /** Submit a scoring job against the last discovered (or uploaded) graph. */
  async runScore(method: string, seed = 0): Promise<RcaResultDoc> {
    if (this.frameId === null || this.abnormalFrameId === null) {
      throw new Error("upload normal and abnormal frames first");
    }
    return this.guarded(async () => {
      const inputs: Record<string, string> = {
        normal: this.frameId as string,
        abnormal: this.abnormalFrameId as string,
      };
      if (this.graphArtifactId !== null) inputs.graph = this.graphArtifactId;
      const jobId = await this.api.submitJob("score", inputs, { method, seed });
      this.lastScoreJob = jobId;
      const job = await this.api.waitForJob(jobId);
      this.ranking = await this.api.artifactJson<RcaResultDoc>(job.output as string);
      return this.ranking;
    });
  }

  async runDetect(kSigma: number, trainFraction = 0.5): Promise<SpansDoc> {
    if (this.frameId === null) throw new Error("upload a metric frame first");
    return this.guarded(() => this.api.detect(this.frameId as string, kSigma, trainFraction));
  }
}
