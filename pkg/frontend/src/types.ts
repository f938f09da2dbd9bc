export interface ChunkResult {
  index: number;
  start_s: number;
  end_s: number;
  label: 0 | 1;
  score: number;
}

export interface PredictResponse {
  verdict: "violence" | "non-violence";
  chunk_results: ChunkResult[];
  inference_ms: number;
  model_id: string;
  provider_id: string;
  rule: string;
}

export interface HealthResponse {
  status: string;
  model_id: string;
  format_version: number;
}

export interface ModelInfo {
  model_id: string;
  provider_id: string;
  classifier_kind: string;
  metrics_snapshot: Record<string, unknown> | null;
}

export interface ServiceError {
  error_code: string;
  message: string;
}
