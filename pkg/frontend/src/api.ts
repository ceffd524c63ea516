/** Typed client over the annotation service's HTTP API. */

import type { AnnotationTask, EvalReport, LineIssue } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ValidationError extends ApiError {
  constructor(public issues: LineIssue[]) {
    super(422, `${issues.length} validation issue(s)`);
  }
}

export class ConflictError extends ApiError {
  constructor(message: string) {
    super(409, message);
  }
}

async function errorMessage(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    return body.message ?? body.error ?? resp.statusText;
  } catch {
    return resp.statusText;
  }
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
    private base = "",
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    return resp;
  }

  async nextTask(prefill: boolean): Promise<AnnotationTask | null> {
    const query = prefill ? "?prefill=ocr" : "";
    const resp = await this.request(`/api/tasks/next${query}`);
    if (resp.status === 204) return null;
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as AnnotationTask;
  }

  async getTask(taskId: string): Promise<AnnotationTask> {
    const resp = await this.request(`/api/tasks/${encodeURIComponent(taskId)}`);
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as AnnotationTask;
  }

  async saveTranscript(
    taskId: string,
    text: string,
    confirm: boolean,
    expectedUpdated?: string,
  ): Promise<void> {
    const body: Record<string, unknown> = { text, confirm };
    if (expectedUpdated !== undefined) body.expected_updated = expectedUpdated;
    const resp = await this.request(
      `/api/tasks/${encodeURIComponent(taskId)}/transcript`,
      {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    if (resp.status === 422) {
      const payload = await resp.json();
      throw new ValidationError((payload.issues ?? []) as LineIssue[]);
    }
    if (resp.status === 409) {
      throw new ConflictError(await errorMessage(resp));
    }
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
  }

  async report(reportId: string): Promise<EvalReport> {
    const resp = await this.request(
      `/api/eval/report/${encodeURIComponent(reportId)}`,
    );
    if (!resp.ok) throw new ApiError(resp.status, await errorMessage(resp));
    return (await resp.json()) as EvalReport;
  }
}
