import type { Assignment, EditEvent, SegmentBundle, SessionInfo } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raise(response: Response): Promise<never> {
  let code = `http_${response.status}`;
  let message = response.statusText;
  try {
    const body = (await response.json()) as { detail?: { error?: string; message?: string } };
    if (body.detail?.error) code = body.detail.error;
    if (body.detail?.message) message = body.detail.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, message);
}

/** Thin typed wrapper over the service HTTP API. All translator calls send
 * the bearer token issued at project setup. */
export class WorkbenchClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      ...init,
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${this.token}`,
        ...(init.headers ?? {}),
      },
    });
    if (!response.ok) await raise(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  assignments(projectId: string): Promise<{ translator_id: string; assignments: Assignment[] }> {
    return this.request(`/projects/${projectId}/assignments`);
  }

  bundle(projectId: string, segmentIndex: number): Promise<SegmentBundle> {
    return this.request(`/projects/${projectId}/bundle?segment=${segmentIndex}`);
  }

  async postEvents(projectId: string, segmentId: string, events: EditEvent[]): Promise<number> {
    const body = JSON.stringify({ segment_id: segmentId, events });
    const result = await this.request<{ acked_seq: number }>(`/projects/${projectId}/events`, {
      method: "POST",
      body,
    });
    return result.acked_seq;
  }

  finalize(
    projectId: string,
    segmentId: string,
    finalText: string,
  ): Promise<{ segment_id: string; final_text: string; active_ms: number }> {
    return this.request(`/projects/${projectId}/finalize`, {
      method: "POST",
      body: JSON.stringify({ segment_id: segmentId, final_text: finalText }),
    });
  }

  sessionInfo(projectId: string, translatorId: string, segmentId: string): Promise<SessionInfo> {
    return this.request(`/projects/${projectId}/sessions/${translatorId}/${segmentId}`);
  }
}
