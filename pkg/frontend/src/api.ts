/**
 * Thin client for the prediction service. The fetch implementation is
 * injectable so contract tests can run against a scripted mock server.
 */

import type { HealthResponse, ModelInfo, PredictResponse, ServiceError } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorCode: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class AvdClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  async health(): Promise<HealthResponse> {
    return this.getJson<HealthResponse>("/health");
  }

  async model(): Promise<ModelInfo> {
    return this.getJson<ModelInfo>("/model");
  }

  /** POST the audio blob as multipart field "audio"; never recomputes anything. */
  async predict(audio: Blob, rule?: string): Promise<PredictResponse> {
    const form = new FormData();
    form.append("audio", audio, "audio.wav");
    const query = rule ? `?rule=${encodeURIComponent(rule)}` : "";
    const resp = await this.fetchImpl(`${this.baseUrl}/predict${query}`, {
      method: "POST",
      body: form,
    });
    if (!resp.ok) {
      throw await toApiError(resp);
    }
    return (await resp.json()) as PredictResponse;
  }

  private async getJson<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, { method: "GET" });
    if (!resp.ok) {
      throw await toApiError(resp);
    }
    return (await resp.json()) as T;
  }
}

async function toApiError(resp: Response): Promise<ApiError> {
  let code = `HTTP${resp.status}`;
  let message = resp.statusText || "request failed";
  try {
    const body = (await resp.json()) as ServiceError;
    if (body.error_code) code = body.error_code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, code, message);
}
