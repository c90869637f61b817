/** Typed client for the prediction service.
 *
 * The selected file's bytes are sent unmodified as the multipart "image"
 * field. Non-2xx responses become ApiError carrying the service's error
 * code when the body has one, or a synthetic `http_<status>` code otherwise.
 */

import type { HealthResponse, ModelInfoResponse, PredictResponse } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

function errorFrom(status: number, statusText: string, body: unknown): ApiError {
  if (typeof body === "object" && body !== null && "error" in body) {
    const inner = (body as { error: unknown }).error;
    if (typeof inner === "object" && inner !== null) {
      const { code, message } = inner as { code?: unknown; message?: unknown };
      if (typeof code === "string") {
        return new ApiError(code, typeof message === "string" ? message : statusText, status);
      }
    }
  }
  return new ApiError(`http_${status}`, statusText || `request failed (${status})`, status);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  async predict(file: File): Promise<PredictResponse> {
    const form = new FormData();
    form.append("image", file, file.name);
    const response = await this.fetchFn(`${this.baseUrl}/api/v1/predict`, {
      method: "POST",
      body: form,
    });
    return this.parse<PredictResponse>(response);
  }

  async health(): Promise<HealthResponse> {
    return this.parse<HealthResponse>(await this.fetchFn(`${this.baseUrl}/api/v1/health`));
  }

  async modelInfo(): Promise<ModelInfoResponse> {
    return this.parse<ModelInfoResponse>(await this.fetchFn(`${this.baseUrl}/api/v1/model`));
  }

  private async parse<T>(response: Response): Promise<T> {
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      throw errorFrom(response.status, response.statusText, body);
    }
    return body as T;
  }
}
