/**
 * DOM wiring: tabs for the two modes, the Start/Stop Recording and Choose
 * File/Predict controls, the verdict banner, and the per-chunk timeline.
 * All presentation state funnels through the pure machine in state.ts.
 */

import { ApiError, AvdClient } from "./api.js";
import { apiBase } from "./config.js";
import { MicRecorder } from "./recorder.js";
import {
  INITIAL_STATE,
  canChooseFile,
  canPredict,
  canStartRecording,
  transition,
  type UiEvent,
  type UiState,
} from "./state.js";
import type { PredictResponse } from "./types.js";
import {
  durationBadge,
  errorGuidance,
  resultSummary,
  timelineSegments,
  uploadWarning,
  verdictBanner,
} from "./view.js";

const client = new AvdClient(apiBase());
const recorder = new MicRecorder();

let state: UiState = INITIAL_STATE;
let audioBlob: Blob | null = null;
let response: PredictResponse | null = null;
let notice = "";
let errorMessage = "";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function dispatch(event: UiEvent): void {
  state = transition(state, event);
  render();
}

async function onStartRecording(): Promise<void> {
  notice = "";
  dispatch({ type: "START_RECORDING" });
  try {
    await recorder.start();
  } catch (err) {
    errorMessage = err instanceof DOMException && err.name === "NotAllowedError"
      ? "Microphone permission was denied — allow access in the browser and retry."
      : `Could not start recording: ${String(err)}`;
    dispatch({ type: "RECORDING_FAILED" });
  }
}

async function onStopRecording(): Promise<void> {
  const recording = await recorder.stop();
  if (!recording) {
    notice = "Stopped before any audio was captured.";
    audioBlob = null;
    dispatch({ type: "STOP_RECORDING", gotAudio: false });
    return;
  }
  audioBlob = recording.blob;
  notice = `Recorded ${recording.durationS.toFixed(1)} s — ${durationBadge(recording.durationS)}.`;
  dispatch({ type: "STOP_RECORDING", gotAudio: true });
}

function onChooseFile(input: HTMLInputElement): void {
  const file = input.files?.[0];
  if (!file) return;
  const warning = uploadWarning(file.name, file.size);
  if (file.size === 0) {
    notice = warning ?? "Empty file.";
    audioBlob = null;
    dispatch({ type: "CHOOSE_FILE", ok: false });
    return;
  }
  notice = warning ?? `Selected ${file.name} (${(file.size / 1024).toFixed(0)} KiB).`;
  audioBlob = warning ? null : file; // non-audio extension: warn, keep Predict disabled
  dispatch({ type: "CHOOSE_FILE", ok: !warning });
}

async function onPredict(): Promise<void> {
  if (!audioBlob) return;
  const rule = (el<HTMLSelectElement>("rule")).value || undefined;
  dispatch({ type: "PREDICT" });
  try {
    response = await client.predict(audioBlob, rule);
    dispatch({ type: "PREDICT_OK" });
  } catch (err) {
    errorMessage = errorGuidance(err);
    if (err instanceof ApiError && err.status === 422) {
      notice = errorMessage; // inline too-short guidance stays visible after retry
    }
    dispatch({ type: "PREDICT_FAILED" });
  }
}

function render(): void {
  el("record-tab").classList.toggle("active", state.mode === "record");
  el("upload-tab").classList.toggle("active", state.mode === "upload");
  el("record-pane").hidden = state.mode !== "record";
  el("upload-pane").hidden = state.mode !== "upload";

  el<HTMLButtonElement>("start-recording").disabled = !canStartRecording(state);
  el<HTMLButtonElement>("stop-recording").disabled = state.phase !== "recording";
  el<HTMLInputElement>("file-input").disabled = !canChooseFile(state);
  el<HTMLButtonElement>("predict").disabled = !canPredict(state);
  el("phase").textContent = state.phase;
  el("notice").textContent = notice;

  const banner = el("banner");
  const timeline = el("timeline");
  const summary = el("summary");
  const errorBox = el("error");

  errorBox.hidden = state.phase !== "error";
  errorBox.textContent = errorMessage;
  el<HTMLButtonElement>("retry").hidden = state.phase !== "error";

  if (state.phase === "result" && response) {
    const v = verdictBanner(response);
    banner.hidden = false;
    banner.textContent = v.text;
    banner.className = `banner ${v.color}`;
    summary.textContent = resultSummary(response);
    timeline.innerHTML = "";
    for (const seg of timelineSegments(response)) {
      const div = document.createElement("div");
      div.className = `segment ${seg.color}`;
      div.style.width = `${(seg.widthFraction * 100).toFixed(3)}%`;
      div.title = seg.tooltip;
      timeline.appendChild(div);
    }
  } else if (state.phase !== "predicting") {
    banner.hidden = true;
    summary.textContent = "";
    timeline.innerHTML = "";
  }
}

async function showServiceIdentity(): Promise<void> {
  const target = el("service-status");
  try {
    const health = await client.health();
    const model = await client.model();
    target.textContent =
      `service ok · model ${health.model_id} · ${model.provider_id} + ${model.classifier_kind}`;
  } catch (err) {
    target.textContent = err instanceof ApiError
      ? `service error: ${err.errorCode}`
      : `service unreachable at ${apiBase()}`;
  }
}

export function bootstrap(): void {
  el("record-tab").addEventListener("click", () => dispatch({ type: "SELECT_MODE", mode: "record" }));
  el("upload-tab").addEventListener("click", () => dispatch({ type: "SELECT_MODE", mode: "upload" }));
  el("start-recording").addEventListener("click", () => void onStartRecording());
  el("stop-recording").addEventListener("click", () => void onStopRecording());
  el("file-input").addEventListener("change", (e) => onChooseFile(e.target as HTMLInputElement));
  el("predict").addEventListener("click", () => void onPredict());
  el("retry").addEventListener("click", () => dispatch({ type: "RETRY" }));
  render();
  void showServiceIdentity();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bootstrap);
}
