/** Shared mock payloads and fetch doubles for the UI tests.
 *
 * Everything here is client-side fabrication — the suite never talks to a
 * real service and runs with no backend built at all.
 */

import type { PredictResponse } from "../src/types.js";

let counter = 0;

function base(): Pick<PredictResponse, "request_id" | "model_digest" | "timing_ms"> {
  counter += 1;
  return {
    request_id: `req-${String(counter).padStart(4, "0")}`,
    model_digest: "a".repeat(64),
    timing_ms: 12.5,
  };
}

export function healthyResponse(): PredictResponse {
  return {
    ...base(),
    phase1: { label: "Healthy", score: -1.7321 },
    phase2: null,
    phase3: null,
    final_label: "Healthy",
  };
}

export function pneumoniaResponse(): PredictResponse {
  return {
    ...base(),
    phase1: { label: "Unhealthy", score: 0.9134 },
    phase2: { label: "Pneumonia", score: -1.2045 },
    phase3: null,
    final_label: "Pneumonia",
  };
}

export function covidLowResponse(): PredictResponse {
  return {
    ...base(),
    phase1: { label: "Unhealthy", score: 1.4501 },
    phase2: { label: "COVID", score: 0.7772 },
    phase3: { label: "COVID-Low", score: -0.3319 },
    final_label: "COVID-Low",
  };
}

export function covidHighResponse(): PredictResponse {
  return {
    ...base(),
    phase1: { label: "Unhealthy", score: 2.0155 },
    phase2: { label: "COVID", score: 1.3369 },
    phase3: { label: "COVID-High", score: 0.8828 },
    final_label: "COVID-High",
  };
}

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function errorResponse(status: number, code: string, message: string): Response {
  return jsonResponse(status, { error: { code, message } });
}

export function makeFile(name = "scan.png"): File {
  return new File([new Uint8Array([0x89, 0x50, 0x4e, 0x47])], name, { type: "image/png" });
}

export interface RouteScript {
  health?: () => Response | Promise<Response>;
  model?: () => Response | Promise<Response>;
  predict?: () => Response | Promise<Response>;
}

/** A fetch double that dispatches on the API path and records calls. */
export function routedFetch(routes: RouteScript) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fetchFn = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    calls.push({ url, init });
    if (url.endsWith("/api/v1/health") && routes.health) return routes.health();
    if (url.endsWith("/api/v1/model") && routes.model) return routes.model();
    if (url.endsWith("/api/v1/predict") && routes.predict) return routes.predict();
    return jsonResponse(404, { error: { code: "not_found", message: url } });
  };
  return { fetchFn: fetchFn as typeof fetch, calls };
}

/** Predict responses served in order, one per call. */
export function predictSequence(bodies: PredictResponse[]): () => Response {
  const queue = [...bodies];
  return () => {
    const next = queue.shift();
    if (!next) throw new Error("predict called more times than scripted");
    return jsonResponse(200, next);
  };
}

export async function flushTasks(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}
