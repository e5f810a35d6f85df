import type {
  ApiErrorBody,
  CorrectionPayload,
  CorrectionReply,
  LogDetailFull,
  LogPage,
  MetricsPayload,
  SchemaSummary,
  SessionStart,
  TurnPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface LogFilters {
  flagged?: boolean;
  domain?: string;
  since?: string;
  until?: string;
  page?: number;
  pageSize?: number;
}

/** Thin typed client over the teaching service HTTP API.  Every UI state
 * change goes through here — there is no other channel to the server. */
export class Api {
  constructor(
    readonly baseUrl: string = "",
    readonly token: string | null = null,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["content-type"] = "application/json";
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers,
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, "network", String(err));
    }
    if (!resp.ok) {
      let code = "http_error";
      let message = `${resp.status} ${resp.statusText}`;
      try {
        const parsed = (await resp.json()) as ApiErrorBody;
        if (parsed.error) {
          code = parsed.error.code;
          message = parsed.error.message;
        }
      } catch {
        // non-JSON error body: keep the status line
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }

  startSession(domain?: string): Promise<SessionStart> {
    return this.request("POST", "/api/sessions", domain ? { domain } : {});
  }

  sendTurn(sessionId: string, utterance: string): Promise<TurnPayload> {
    return this.request("POST", `/api/sessions/${sessionId}/turns`, {
      user_utterance: utterance,
    });
  }

  endSession(sessionId: string): Promise<{ session_id: string; active: boolean }> {
    return this.request("POST", `/api/sessions/${sessionId}/end`);
  }

  listLogs(filters: LogFilters = {}): Promise<LogPage> {
    const params = new URLSearchParams();
    if (filters.flagged) params.set("flagged", "true");
    if (filters.domain) params.set("domain", filters.domain);
    if (filters.since) params.set("since", filters.since);
    if (filters.until) params.set("until", filters.until);
    if (filters.page) params.set("page", String(filters.page));
    if (filters.pageSize) params.set("page_size", String(filters.pageSize));
    const qs = params.toString();
    return this.request("GET", "/api/logs" + (qs ? `?${qs}` : ""));
  }

  getLog(sessionId: string): Promise<LogDetailFull> {
    return this.request("GET", `/api/logs/${sessionId}`);
  }

  setFlags(sessionId: string, flags: string[]): Promise<{ id: string; flags: string[] }> {
    return this.request("PUT", `/api/logs/${sessionId}/flags`, { flags });
  }

  submitCorrection(payload: CorrectionPayload): Promise<CorrectionReply> {
    return this.request("POST", "/api/corrections", payload);
  }

  retrain(): Promise<Record<string, unknown>> {
    return this.request("POST", "/api/retrain");
  }

  metrics(): Promise<MetricsPayload> {
    return this.request("GET", "/api/metrics");
  }

  schema(): Promise<SchemaSummary> {
    return this.request("GET", "/api/schema");
  }

  async exportCorpus(since?: string): Promise<string> {
    const headers: Record<string, string> = {};
    if (this.token) headers["authorization"] = `Bearer ${this.token}`;
    const qs = since ? `?since=${encodeURIComponent(since)}` : "";
    const resp = await this.fetchImpl(`${this.baseUrl}/api/export${qs}`, { headers });
    if (!resp.ok) throw new ApiError(resp.status, "http_error", resp.statusText);
    return resp.text();
  }
}
