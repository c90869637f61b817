/** Wire formats of the prediction API, mirrored from the service. */

export interface PhaseVerdict {
  label: string;
  score: number;
}

export interface PredictResponse {
  request_id: string;
  phase1: PhaseVerdict;
  phase2: PhaseVerdict | null;
  phase3: PhaseVerdict | null;
  final_label: string;
  model_digest: string;
  timing_ms: number;
}

export interface HealthResponse {
  status: string;
  model_digest: string;
}

export interface ModelInfoResponse {
  model_digest: string;
  extractor_id: string;
  extractor_spec: Record<string, unknown>;
  prep_config: Record<string, unknown>;
  prep_digest: string;
  phases: Array<Record<string, unknown>>;
}

export interface ErrorBody {
  error: { code: string; message: string };
}

/** The four labels a completed prediction can end on, in display order. */
export const FINAL_LABELS = ["Healthy", "Pneumonia", "COVID-Low", "COVID-High"] as const;

export type FinalLabel = (typeof FINAL_LABELS)[number];
