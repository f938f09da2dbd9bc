/**
 * Microphone capture that yields a PCM16 WAV blob.
 *
 * Raw Float32 frames are pulled off an AudioContext instead of relying on
 * MediaRecorder's container format, so the upload is always WAV no matter
 * what the browser would natively record. Browser-only module.
 */

import { concatSamples, wavBlobFromSamples } from "./wav.js";

export interface Recording {
  blob: Blob;
  durationS: number;
  sampleRateHz: number;
}

export class MicRecorder {
  private stream: MediaStream | null = null;
  private context: AudioContext | null = null;
  private processor: ScriptProcessorNode | null = null;
  private buffers: Float32Array[] = [];

  get active(): boolean {
    return this.context !== null;
  }

  /** Throws DOMException (NotAllowedError) when permission is denied. */
  async start(): Promise<void> {
    if (this.active) throw new Error("already recording");
    this.stream = await navigator.mediaDevices.getUserMedia({
      audio: { channelCount: 1, echoCancellation: true, noiseSuppression: true },
    });
    this.context = new AudioContext();
    const source = this.context.createMediaStreamSource(this.stream);
    this.processor = this.context.createScriptProcessor(4096, 1, 1);
    this.buffers = [];
    this.processor.onaudioprocess = (event) => {
      this.buffers.push(new Float32Array(event.inputBuffer.getChannelData(0)));
    };
    source.connect(this.processor);
    this.processor.connect(this.context.destination);
  }

  /** Returns null when stopped before any audio was captured. */
  async stop(): Promise<Recording | null> {
    if (!this.context) return null;
    const sampleRateHz = this.context.sampleRate;
    this.processor?.disconnect();
    this.stream?.getTracks().forEach((t) => t.stop());
    await this.context.close();
    this.context = null;
    this.processor = null;
    this.stream = null;

    const samples = concatSamples(this.buffers);
    this.buffers = [];
    if (samples.length === 0) return null;
    return {
      blob: wavBlobFromSamples(samples, sampleRateHz),
      durationS: samples.length / sampleRateHz,
      sampleRateHz,
    };
  }
}
