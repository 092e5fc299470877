import type { Health, SessionInfo, SubmissionPage, ViewPayload } from "./types.js";

/**
 * Minimal fetch signature the client depends on.  Tests inject their own
 * implementation to count or fake requests; production code uses the
 * platform fetch.
 */
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** A non-2xx answer from the service, with the decoded `detail` message. */
export class ApiError extends Error {
  readonly status: number;
  readonly detail: string;

  constructor(status: number, detail: string) {
    super(`${status}: ${detail}`);
    this.name = "ApiError";
    this.status = status;
    this.detail = detail;
  }
}

export interface FilterRequest {
  variant_id: string;
  error_kind?: string;
}

export interface SubmissionQuery {
  errorKind?: string | null;
  page?: number;
}

/**
 * Thin JSON client for the analysis service.  One method per endpoint; no
 * caching, no retries, no interpretation of the payloads.
 */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  createSession(): Promise<SessionInfo> {
    return this.request<SessionInfo>("POST", "/sessions");
  }

  getView(sessionId: string): Promise<ViewPayload> {
    return this.request<ViewPayload>("GET", `/sessions/${sessionId}/view`);
  }

  pushFilter(sessionId: string, term: FilterRequest): Promise<ViewPayload> {
    return this.request<ViewPayload>("POST", `/sessions/${sessionId}/filters`, term);
  }

  popFilter(sessionId: string): Promise<ViewPayload> {
    return this.request<ViewPayload>("DELETE", `/sessions/${sessionId}/filters/last`);
  }

  clearFilters(sessionId: string): Promise<ViewPayload> {
    return this.request<ViewPayload>("DELETE", `/sessions/${sessionId}/filters`);
  }

  getSubmissions(
    sessionId: string,
    variantId: string,
    query: SubmissionQuery = {},
  ): Promise<SubmissionPage> {
    const params = new URLSearchParams();
    if (query.errorKind != null) {
      params.set("error_kind", query.errorKind);
    }
    if (query.page != null) {
      params.set("page", String(query.page));
    }
    const qs = params.toString();
    const path =
      `/sessions/${sessionId}/variants/${encodeURIComponent(variantId)}/submissions` +
      (qs === "" ? "" : `?${qs}`);
    return this.request<SubmissionPage>("GET", path);
  }

  health(): Promise<Health> {
    return this.request<Health>("GET", "/healthz");
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await readDetail(response));
    }
    return (await response.json()) as T;
  }
}

async function readDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      return body.detail;
    }
    return JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText === "" ? "request failed" : response.statusText;
  }
}
