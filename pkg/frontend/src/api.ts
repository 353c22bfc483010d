// Fetch-based client for the curation service. The UI talks to the
// server through this module only; nothing here caches or rewrites
// server state.

import type {
  AnnotationRanking,
  Decision,
  RunMeta,
  RunSummary,
  Stage,
  TaskListing,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface CreateRunRequest {
  record?: Record<string, unknown>;
  document?: Record<string, unknown>;
  source_path?: string;
}

export interface CreateRunResponse {
  schema_version: number;
  run_id: string;
  duplicate: boolean;
}

export class CurationClient {
  constructor(
    public baseUrl: string,
    public editorId: string = 'reviewer',
  ) {
    // fetch() treats "base/path" vs "base" + "/path" differently
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'X-Editor-Id': this.editorId };
    if (body !== undefined) {
      headers['Content-Type'] = 'application/json';
    }
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const text = await resp.text();
    if (!resp.ok) {
      let message = text;
      try {
        const parsed = JSON.parse(text);
        message = parsed.error ?? parsed.detail ?? text;
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(resp.status, `${method} ${path}: ${message}`);
    }
    return JSON.parse(text) as T;
  }

  /** Raw body passthrough for exports; the server's bytes are canonical. */
  private async requestText(path: string): Promise<string> {
    const resp = await fetch(this.baseUrl + path);
    const text = await resp.text();
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET ${path}: ${text}`);
    }
    return text;
  }

  createRun(body: CreateRunRequest): Promise<CreateRunResponse> {
    return this.request('POST', '/runs', body);
  }

  async listRuns(): Promise<RunMeta[]> {
    const data = await this.request<{ runs: RunMeta[] }>('GET', '/runs');
    return data.runs;
  }

  getRun(runId: string): Promise<RunSummary> {
    return this.request('GET', `/runs/${encodeURIComponent(runId)}`);
  }

  listTasks(runId: string, stage?: Stage): Promise<TaskListing> {
    const suffix = stage ? `?stage=${encodeURIComponent(stage)}` : '';
    return this.request('GET', `/runs/${encodeURIComponent(runId)}/tasks${suffix}`);
  }

  submitDecision(
    taskId: string,
    decision: Decision,
    payload?: Record<string, unknown>,
  ): Promise<RunSummary> {
    const body: Record<string, unknown> = { decision };
    if (payload !== undefined) {
      body.payload = payload;
    }
    return this.request('POST', `/tasks/${encodeURIComponent(taskId)}/decision`, body);
  }

  recompute(runId: string): Promise<RunSummary> {
    return this.request('POST', `/runs/${encodeURIComponent(runId)}/recompute`, {});
  }

  exportRun(runId: string, format: 'json' | 'jsonl' = 'json', waive: Stage[] = []): Promise<string> {
    const params = new URLSearchParams({ format });
    if (waive.length > 0) {
      params.set('waive', waive.join(','));
    }
    return this.requestText(`/runs/${encodeURIComponent(runId)}/export?${params}`);
  }

  pageImageUrl(runId: string, page: number): string {
    return `${this.baseUrl}/runs/${encodeURIComponent(runId)}/pages/${page}/image`;
  }

  exportUrl(runId: string, format: 'json' | 'jsonl' = 'json'): string {
    return `${this.baseUrl}/runs/${encodeURIComponent(runId)}/export?format=${format}`;
  }

  annotationCandidates(runId: string, querySmiles: string, top = 10): Promise<AnnotationRanking> {
    const params = new URLSearchParams({ query_smiles: querySmiles, top: String(top) });
    return this.request('GET', `/runs/${encodeURIComponent(runId)}/annotation?${params}`);
  }
}
