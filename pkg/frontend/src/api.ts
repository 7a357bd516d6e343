/** Thin typed client for the range service.
 *
 * Every non-2xx response is thrown as an ApiError carrying the server's
 * error code and detail string verbatim, so callers can place the exact
 * server wording in front of the user.
 */
import type {
  RangesPayload,
  RangesStatus,
  SolutionPayload,
  SystemPayload,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: string;
  readonly intervals?: unknown;

  constructor(status: number, code: string, detail: string, intervals?: unknown) {
    super(detail);
    this.status = status;
    this.code = code;
    this.detail = detail;
    this.intervals = intervals;
  }
}

export interface ComputingPayload {
  status: "computing";
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetcher: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetcher(`${this.base}${path}`, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok && response.status !== 202) {
      const record = (body ?? {}) as Record<string, unknown>;
      throw new ApiError(
        response.status,
        String(record["error"] ?? "unknown"),
        String(record["detail"] ?? response.statusText),
        record["intervals"],
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  system(): Promise<SystemPayload> {
    return this.request("/api/system");
  }

  select(variables: string[]): Promise<{ selected: string[]; status: string }> {
    return this.post("/api/select", { variables });
  }

  ranges(): Promise<RangesPayload | ComputingPayload> {
    return this.request("/api/ranges");
  }

  rangesStatus(): Promise<RangesStatus> {
    return this.request("/api/ranges/status");
  }

  assign(parameter: string, value: number): Promise<{ assigned: Record<string, number>; status: string }> {
    return this.post("/api/assign", { parameter, value });
  }

  undo(): Promise<{ assigned: Record<string, number>; status: string }> {
    return this.post("/api/undo");
  }

  finalize(): Promise<SolutionPayload> {
    return this.post("/api/finalize");
  }

  solution(): Promise<SolutionPayload> {
    return this.request("/api/solution");
  }
}
