/**
 * Client-side 16-bit PCM WAV encoding, so the backend only ever sees one
 * codec regardless of what the browser's recorder produced.
 */

export function encodeWavPcm16(samples: Float32Array, sampleRateHz: number): ArrayBuffer {
  const n = samples.length;
  const buffer = new ArrayBuffer(44 + n * 2);
  const view = new DataView(buffer);

  writeAscii(view, 0, "RIFF");
  view.setUint32(4, 36 + n * 2, true);
  writeAscii(view, 8, "WAVE");
  writeAscii(view, 12, "fmt ");
  view.setUint32(16, 16, true);          // fmt chunk size
  view.setUint16(20, 1, true);           // PCM
  view.setUint16(22, 1, true);           // mono
  view.setUint32(24, sampleRateHz, true);
  view.setUint32(28, sampleRateHz * 2, true); // byte rate
  view.setUint16(32, 2, true);           // block align
  view.setUint16(34, 16, true);          // bits per sample
  writeAscii(view, 36, "data");
  view.setUint32(40, n * 2, true);

  let offset = 44;
  for (let i = 0; i < n; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i] ?? 0));
    const pcm = Math.max(-32768, Math.min(32767, Math.round(clamped * 32768)));
    view.setInt16(offset, pcm, true);
    offset += 2;
  }
  return buffer;
}

export function wavBlobFromSamples(samples: Float32Array, sampleRateHz: number): Blob {
  return new Blob([encodeWavPcm16(samples, sampleRateHz)], { type: "audio/wav" });
}

/** Merge recorder buffers into one contiguous sample array. */
export function concatSamples(buffers: Float32Array[]): Float32Array {
  const total = buffers.reduce((acc, b) => acc + b.length, 0);
  const out = new Float32Array(total);
  let offset = 0;
  for (const b of buffers) {
    out.set(b, offset);
    offset += b.length;
  }
  return out;
}

function writeAscii(view: DataView, offset: number, text: string): void {
  for (let i = 0; i < text.length; i++) {
    view.setUint8(offset + i, text.charCodeAt(i));
  }
}
