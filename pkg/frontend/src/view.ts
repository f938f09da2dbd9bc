/**
 * Pure response -> view-model mapping. The verdict text comes verbatim from
 * the service; nothing here re-derives labels or verdicts.
 */

import { ApiError } from "./api.js";
import type { PredictResponse } from "./types.js";

export const CHUNK_SECONDS = 2.5;
export const MIN_KEEP_SECONDS = 1.25;

export interface Banner {
  text: string;
  color: "red" | "green";
}

export interface TimelineSegment {
  index: number;
  startS: number;
  endS: number;
  label: 0 | 1;
  color: "red" | "green";
  widthFraction: number;
  tooltip: string;
}

export function verdictBanner(response: PredictResponse): Banner {
  return {
    text: response.verdict,
    color: response.verdict === "violence" ? "red" : "green",
  };
}

export function timelineSegments(response: PredictResponse): TimelineSegment[] {
  const chunks = response.chunk_results;
  return chunks.map((c) => ({
    index: c.index,
    startS: c.start_s,
    endS: c.end_s,
    label: c.label,
    color: c.label === 1 ? "red" : "green",
    widthFraction: chunks.length > 0 ? 1 / chunks.length : 0,
    tooltip: `${c.start_s.toFixed(1)}–${c.end_s.toFixed(1)} s · ` +
      `${c.label === 1 ? "violence" : "non-violence"} · score ${c.score.toFixed(2)}`,
  }));
}

export function resultSummary(response: PredictResponse): string {
  return `model ${response.model_id} (${response.provider_id}) · ` +
    `rule ${response.rule} · ${response.inference_ms.toFixed(0)} ms`;
}

/** Actionable message for a failed prediction. */
export function errorGuidance(error: unknown): string {
  if (error instanceof ApiError) {
    if (error.status === 422) {
      return `Audio is shorter than ${MIN_KEEP_SECONDS} s — record or upload at least ` +
        `${MIN_KEEP_SECONDS} seconds and try again.`;
    }
    if (error.status === 413) {
      return "File is too large for the service's upload limit.";
    }
    if (error.status === 503) {
      return "The service has no model loaded; start it with a valid artifact.";
    }
    return `${error.errorCode}: ${error.message}`;
  }
  return "Could not reach the prediction service — check that it is running, then retry.";
}

const AUDIO_EXTENSIONS = [".wav", ".wave"];

/** Pre-submit warning for the chosen file; null means no complaint. */
export function uploadWarning(fileName: string, sizeBytes: number): string | null {
  if (sizeBytes === 0) {
    return "This file is empty (0 bytes) and cannot be analyzed.";
  }
  const lower = fileName.toLowerCase();
  if (!AUDIO_EXTENSIONS.some((ext) => lower.endsWith(ext))) {
    return `"${fileName}" does not look like a WAV file; the service only decodes WAV audio.`;
  }
  return null;
}

/** How many 2.5 s chunks a clip of this duration will produce. */
export function expectedChunks(durationS: number): number {
  const full = Math.floor(durationS / CHUNK_SECONDS);
  const remainder = durationS - full * CHUNK_SECONDS;
  return full + (remainder >= MIN_KEEP_SECONDS ? 1 : 0);
}

export function durationBadge(durationS: number): string {
  const chunks = expectedChunks(durationS);
  if (chunks === 0) {
    return `too short: needs ≥ ${MIN_KEEP_SECONDS} s to produce a chunk`;
  }
  return `will produce ≥ 1 chunk (${chunks} × ${CHUNK_SECONDS} s)`;
}
