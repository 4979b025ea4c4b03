// HTTP client for the recipe service.  Every response keeps its raw body
// text alongside the parsed value so views can display service values
// verbatim -- the UI never recomputes color math.

import type {
  HealthResponse,
  MatchResponse,
  MixResponse,
  PigmentsResponse,
  RGB,
} from "./types.js";

export interface ApiResult<T> {
  raw: string;
  data: T;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorType: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<ApiResult<T>> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const raw = await response.text();
    if (!response.ok) {
      let errorType = "http_error";
      let message = `HTTP ${response.status}`;
      try {
        const body = JSON.parse(raw);
        errorType = body.error?.type ?? errorType;
        message = body.error?.message ?? message;
      } catch {
        // non-JSON error body; keep the defaults
      }
      throw new ApiError(response.status, errorType, message);
    }
    return { raw, data: JSON.parse(raw) as T };
  }

  health(): Promise<ApiResult<HealthResponse>> {
    return this.request<HealthResponse>("/api/health");
  }

  pigments(): Promise<ApiResult<PigmentsResponse>> {
    return this.request<PigmentsResponse>("/api/pigments");
  }

  match(rgb: RGB, topK: number, signal?: AbortSignal): Promise<ApiResult<MatchResponse>> {
    return this.request<MatchResponse>("/api/match", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rgb, top_k: topK }),
      signal,
    });
  }

  mix(pa: number, qa: number, pb: number, qb: number): Promise<ApiResult<MixResponse>> {
    return this.request<MixResponse>("/api/mix", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pa, qa, pb, qb }),
    });
  }
}
