// Typed client for the prioritization service. All numbers shown in the UI
// come out of these responses; the client never derives rankings or costs.

import type {
  ApiIssue,
  CreateSessionResponse,
  RankingResponse,
  ResponseItem,
  SessionState,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly status: number;
  readonly issues: ApiIssue[];
  readonly retry: boolean;

  constructor(status: number, message: string, issues: ApiIssue[] = [], retry = false) {
    super(message);
    this.status = status;
    this.issues = issues;
    this.retry = retry;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: Record<string, unknown> = {};
  try {
    body = (await response.json()) as Record<string, unknown>;
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  const issues = Array.isArray(body.errors) ? (body.errors as ApiIssue[]) : [];
  const message =
    typeof body.error === "string"
      ? body.error
      : issues.length
        ? issues.map((issue) => `${issue.path}: ${issue.message}`).join("; ")
        : `request failed with status ${response.status}`;
  return new ApiError(response.status, message, issues, body.retry === true);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.base + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  createSession(project: unknown, budget: number, solutionCap?: number): Promise<CreateSessionResponse> {
    const payload: Record<string, unknown> = { project, budget };
    if (solutionCap !== undefined) {
      payload.solution_cap = solutionCap;
    }
    return this.request("POST", "/sessions", payload);
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  submitResponses(sessionId: string, responses: ResponseItem[]): Promise<{ session_id: string; state: SessionState }> {
    return this.request("POST", `/sessions/${sessionId}/responses`, { responses });
  }

  getRanking(sessionId: string): Promise<RankingResponse> {
    return this.request("GET", `/sessions/${sessionId}/ranking`);
  }
}
