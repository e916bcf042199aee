/**
 * Typed client for the crisisbrief HTTP API. The console talks to the
 * service exclusively through this module, which makes the thin-client
 * property testable: intercept `fetchFn` and every displayed value must
 * trace back to one of these responses.
 */

export interface EnrichmentSummary {
  id: string;
  dimensions: string[];
}

export interface TopicsSummary {
  id: string;
  selected_k: number | null;
}

export interface DatasetSummary {
  id: string;
  event_name: string;
  area: string;
  posts: number;
  dropped: number;
  enrichments: EnrichmentSummary[];
  topics: TopicsSummary[];
  samples: string[];
  reports: string[];
}

export interface JobRecord {
  job_id: string;
  kind: string;
  status: "queued" | "running" | "done" | "failed";
  output_ref: string | null;
  error: string | null;
}

export interface JobHandle {
  job_id: string;
  existing: boolean;
}

export interface ReportRequestFields {
  mode: "basic" | "advanced";
  report_kind: "topics" | "opinions" | "city_subevents";
  event?: string;
  area?: string;
  date_range?: string;
  word_limit: number;
  city?: string | null;
  stakeholders?: string[];
}

export interface SamplingSpecBody {
  dimensions: { dimension: string; classes: string[] }[];
  target_size: number;
  filters: { city?: string | null; subevent_only?: boolean } | null;
  cap_to_target: boolean;
}

export interface Reference {
  marker: number;
  post_id: string;
  excerpt: string;
}

export interface ReportRecord {
  id: string;
  corpus_id?: string;
  request: Record<string, unknown>;
  body: string;
  references: Reference[];
  warnings: string[];
  input_manifest: Record<string, unknown>;
  created_at: string;
}

export interface ReportListEntry {
  id: string;
  corpus_id: string;
  mode: string;
  report_kind: string;
  created_at: string;
}

export interface ChatRecord {
  id: string;
  report_id: string;
  turns: { question: string; answer: string }[];
}

export interface TopicExport {
  k: number;
  coherence: number;
  topics: {
    id: number;
    label: string;
    terms: { term: string; weight: number }[];
    post_ids: string[];
    size: number;
  }[];
}

export interface ComparisonRecord {
  corpus_id: string;
  rows: { metric: string; basic: number; advanced: number }[];
  items: string[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    public baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "unreachable", `service unreachable: ${String(err)}`);
    }
    const text = await response.text();
    let body: unknown = null;
    if (text) {
      try {
        body = JSON.parse(text);
      } catch {
        throw new ApiError(response.status, "bad_payload", "service returned non-JSON payload");
      }
    }
    if (!response.ok) {
      const envelope = (body ?? {}) as { code?: string; message?: string; detail?: unknown };
      throw new ApiError(
        response.status,
        envelope.code ?? "error",
        envelope.message ?? `request failed with ${response.status}`,
        envelope.detail ?? null,
      );
    }
    return body as T;
  }

  private postJson<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  listDatasets(): Promise<{ datasets: DatasetSummary[] }> {
    return this.request("/datasets");
  }

  async uploadDataset(
    content: Blob | string,
    options: { filename?: string; format?: string; eventName?: string; area?: string } = {},
  ): Promise<{ id: string; posts: number; dropped: number }> {
    const form = new FormData();
    const blob = typeof content === "string" ? new Blob([content]) : content;
    form.append("file", blob, options.filename ?? "dataset.jsonl");
    form.append("format", options.format ?? "jsonl");
    if (options.eventName) form.append("event_name", options.eventName);
    if (options.area) form.append("area", options.area);
    return this.request("/datasets", { method: "POST", body: form });
  }

  /** 409 on an identical in-flight request still names the job, so the
   * caller can poll it as if the submission had been accepted. */
  private async submitJob(path: string, payload: unknown): Promise<JobHandle> {
    try {
      return await this.postJson<JobHandle>(path, payload);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const detail = err.detail as { job_id?: string } | null;
        if (detail?.job_id) return { job_id: detail.job_id, existing: true };
      }
      throw err;
    }
  }

  enrich(corpusId: string, dimensions: string[]): Promise<JobHandle> {
    return this.submitJob(`/corpora/${corpusId}/enrich`, { dimensions });
  }

  discoverTopics(corpusId: string, kGrid: number[], seed = 0): Promise<JobHandle> {
    return this.submitJob(`/corpora/${corpusId}/topics`, { k_grid: kGrid, seed });
  }

  buildSample(corpusId: string, spec: SamplingSpecBody): Promise<JobHandle> {
    return this.submitJob(`/corpora/${corpusId}/samples`, spec);
  }

  job(jobId: string): Promise<JobRecord> {
    return this.request(`/jobs/${jobId}`);
  }

  artifact<T = Record<string, unknown>>(kind: string, id: string): Promise<T> {
    return this.request(`/artifacts/${kind}/${id}`);
  }

  createReport(body: {
    corpus_id: string;
    request: ReportRequestFields;
    sampling?: SamplingSpecBody;
    sample_id?: string;
  }): Promise<{ id: string; report: ReportRecord }> {
    return this.postJson("/reports", body);
  }

  getReport(reportId: string): Promise<ReportRecord> {
    return this.request(`/reports/${reportId}`);
  }

  listReports(corpusId: string): Promise<{ reports: ReportListEntry[] }> {
    return this.request(`/reports?corpus_id=${encodeURIComponent(corpusId)}`);
  }

  createChat(reportId: string): Promise<{ id: string; report_id: string }> {
    return this.postJson("/chats", { report_id: reportId });
  }

  getChat(chatId: string): Promise<ChatRecord> {
    return this.request(`/chats/${chatId}`);
  }

  sendChatMessage(chatId: string, question: string): Promise<{ answer: string; turns: number }> {
    return this.postJson(`/chats/${chatId}/messages`, { question });
  }

  createEval(body: {
    basic_report_id: string;
    advanced_report_id: string;
    items?: string[];
    repetitions?: number;
  }): Promise<{ id: string; comparison: ComparisonRecord }> {
    return this.postJson("/evals", body);
  }
}
