/**
 * UI state machine for the two-mode app (record / upload).
 *
 * Pure transition function so the whole machine is enumerable in tests:
 * every reachable state must keep an exit path, Predict is possible only
 * with audio in hand, and recording/predicting are mutually exclusive.
 * Blobs, responses, and error text live next to the machine in the store,
 * not inside it.
 */

export type Mode = "record" | "upload";
export type Phase = "idle" | "recording" | "recorded" | "predicting" | "result" | "error";

export interface UiState {
  mode: Mode;
  phase: Phase;
  hasAudio: boolean;
}

export type UiEvent =
  | { type: "SELECT_MODE"; mode: Mode }
  | { type: "START_RECORDING" }
  | { type: "STOP_RECORDING"; gotAudio: boolean }
  | { type: "RECORDING_FAILED" }
  | { type: "CHOOSE_FILE"; ok: boolean }
  | { type: "PREDICT" }
  | { type: "PREDICT_OK" }
  | { type: "PREDICT_FAILED" }
  | { type: "RETRY" };

export const INITIAL_STATE: UiState = { mode: "record", phase: "idle", hasAudio: false };

export function canPredict(state: UiState): boolean {
  return state.hasAudio && (state.phase === "recorded" || state.phase === "result");
}

export function canStartRecording(state: UiState): boolean {
  return (
    state.mode === "record" &&
    state.phase !== "recording" &&
    state.phase !== "predicting"
  );
}

export function canChooseFile(state: UiState): boolean {
  return state.mode === "upload" && state.phase !== "predicting";
}

export function transition(state: UiState, event: UiEvent): UiState {
  switch (event.type) {
    case "SELECT_MODE":
      // switching modes mid-recording/prediction is not offered by the UI
      if (state.phase === "recording" || state.phase === "predicting") return state;
      if (event.mode === state.mode) return state;
      return { mode: event.mode, phase: "idle", hasAudio: false };

    case "START_RECORDING":
      if (!canStartRecording(state)) return state;
      return { ...state, phase: "recording", hasAudio: false };

    case "STOP_RECORDING":
      if (state.phase !== "recording") return state;
      return event.gotAudio
        ? { ...state, phase: "recorded", hasAudio: true }
        : { ...state, phase: "idle", hasAudio: false }; // stopped before audio: notice, back to idle

    case "RECORDING_FAILED":
      if (state.mode !== "record") return state;
      return { ...state, phase: "error", hasAudio: false };

    case "CHOOSE_FILE":
      if (!canChooseFile(state)) return state;
      return event.ok
        ? { ...state, phase: "recorded", hasAudio: true } // re-choosing replaces the blob
        : { ...state, phase: "idle", hasAudio: false };   // zero-byte file rejected

    case "PREDICT":
      if (!canPredict(state)) return state;
      return { ...state, phase: "predicting" };

    case "PREDICT_OK":
      if (state.phase !== "predicting") return state;
      return { ...state, phase: "result" };

    case "PREDICT_FAILED":
      if (state.phase !== "predicting") return state;
      return { ...state, phase: "error" };

    case "RETRY":
      if (state.phase !== "error") return state;
      // back to whatever still makes sense: kept audio allows re-predicting
      return { ...state, phase: state.hasAudio ? "recorded" : "idle" };
  }
}

/** Every event the machine understands, with representative payloads. */
export const EVENT_ALPHABET: UiEvent[] = [
  { type: "SELECT_MODE", mode: "record" },
  { type: "SELECT_MODE", mode: "upload" },
  { type: "START_RECORDING" },
  { type: "STOP_RECORDING", gotAudio: true },
  { type: "STOP_RECORDING", gotAudio: false },
  { type: "RECORDING_FAILED" },
  { type: "CHOOSE_FILE", ok: true },
  { type: "CHOOSE_FILE", ok: false },
  { type: "PREDICT" },
  { type: "PREDICT_OK" },
  { type: "PREDICT_FAILED" },
  { type: "RETRY" },
];
