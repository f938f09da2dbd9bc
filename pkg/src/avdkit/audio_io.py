"""WAV decoding, resampling, and fixed-length chunking.

The decoder is a minimal RIFF/WAVE parser: PCM 16/24-bit and IEEE float32,
multichannel downmixed by channel mean, unknown chunks ignored. Resampling is
rational-ratio polyphase with a Kaiser-windowed sinc kernel. Chunking cuts
consecutive non-overlapping windows (default 2.5 s) and keeps a zero-padded
trailing remainder iff it covers at least half a window.

All operations are pure; none mutate their inputs.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import firwin, upfirdn

from .errors import (
    EmptyAudio,
    InvalidRate,
    MalformedContainer,
    PayloadTooLarge,
    UnsupportedCodec,
)

DEFAULT_MAX_WAV_BYTES = 200 * 1024 * 1024
DEFAULT_CHUNK_SECONDS = 2.5
DEFAULT_MIN_KEEP_FRACTION = 0.5

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE

# Kaiser-windowed sinc resampler: 32 taps per polyphase branch, beta 8.6
# (~86 dB alias rejection).
_TAPS_PER_PHASE = 32
_KAISER_BETA = 8.6


@dataclass(frozen=True)
class AudioBuffer:
    """Decoded mono audio: float samples in [-1, 1] at a fixed rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError("AudioBuffer is single-channel; got %dd array" % samples.ndim)
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        if samples.size and np.max(np.abs(samples)) > 1.0 + 1e-12:
            raise ValueError("AudioBuffer samples must lie in [-1, 1]")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class Chunk:
    """Fixed-length analysis segment cut from one source buffer."""

    samples: np.ndarray
    sample_rate_hz: int
    source_id: str
    index: int
    start_s: float
    padded: bool = False

    @property
    def chunk_id(self) -> str:
        return f"{self.source_id}#{self.index}"


def decode_wav(raw_bytes: bytes, max_bytes: int = DEFAULT_MAX_WAV_BYTES) -> AudioBuffer:
    """Decode a RIFF/WAVE byte string to a normalized mono AudioBuffer.

    PCM16 is scaled by 1/32768, PCM24 by 1/8388608; float32 is clamped to
    [-1, 1]. Multichannel input is downmixed by arithmetic mean.
    """
    if len(raw_bytes) > max_bytes:
        raise PayloadTooLarge(f"{len(raw_bytes)} bytes exceeds limit {max_bytes}")
    if len(raw_bytes) < 12 or raw_bytes[:4] != b"RIFF" or raw_bytes[8:12] != b"WAVE":
        raise MalformedContainer("not a RIFF/WAVE stream")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw_bytes):
        cid = raw_bytes[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw_bytes, pos + 4)
        body = raw_bytes[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedContainer(f"truncated '{cid.decode(errors='replace')}' chunk")
        if cid == b"fmt ":
            fmt = _parse_fmt(body)
        elif cid == b"data":
            data = body
        # unknown chunks skipped; RIFF pads odd-sized chunks to even offsets
        pos += 8 + size + (size & 1)

    if fmt is None:
        raise MalformedContainer("missing fmt chunk")
    if data is None:
        raise MalformedContainer("missing data chunk")

    audio_format, n_channels, sample_rate, bits = fmt
    if n_channels < 1:
        raise MalformedContainer("zero channels")
    if sample_rate <= 0:
        raise MalformedContainer("non-positive sample rate in header")

    if audio_format == _WAVE_FORMAT_PCM and bits == 16:
        frame_bytes = 2 * n_channels
        usable = len(data) - len(data) % frame_bytes
        x = np.frombuffer(data[:usable], dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == _WAVE_FORMAT_PCM and bits == 24:
        frame_bytes = 3 * n_channels
        usable = len(data) - len(data) % frame_bytes
        b = np.frombuffer(data[:usable], dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        val = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        val = np.where(val >= 1 << 23, val - (1 << 24), val)
        x = val.astype(np.float64) / 8388608.0
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        frame_bytes = 4 * n_channels
        usable = len(data) - len(data) % frame_bytes
        x = np.frombuffer(data[:usable], dtype="<f4").astype(np.float64)
        x = np.clip(x, -1.0, 1.0)
    else:
        raise UnsupportedCodec(f"format 0x{audio_format:04x} / {bits}-bit not supported")

    if n_channels > 1:
        x = x.reshape(-1, n_channels).mean(axis=1)
    if x.size == 0:
        raise EmptyAudio("zero frames")
    return AudioBuffer(samples=x, sample_rate_hz=sample_rate)


def _parse_fmt(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise MalformedContainer("fmt chunk too short")
    audio_format, n_channels, sample_rate, _byte_rate, _block_align, bits = struct.unpack_from(
        "<HHIIHH", body, 0
    )
    if audio_format == _WAVE_FORMAT_EXTENSIBLE:
        # effective codec lives in the first two bytes of the SubFormat GUID
        if len(body) < 26:
            raise MalformedContainer("extensible fmt chunk too short")
        (audio_format,) = struct.unpack_from("<H", body, 24)
    return audio_format, n_channels, sample_rate, bits


def encode_wav_pcm16(samples: np.ndarray, sample_rate_hz: int) -> bytes:
    """Encode mono float samples in [-1, 1] as a PCM16 WAV byte string."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(pcm), b"WAVE",
        b"fmt ", 16, _WAVE_FORMAT_PCM, 1, sample_rate_hz,
        sample_rate_hz * 2, 2, 16,
        b"data", len(pcm),
    )
    return header + pcm


def resample(buf: AudioBuffer, target_hz: int) -> AudioBuffer:
    """Resample to target_hz with a polyphase Kaiser-windowed sinc filter.

    Identity when rates match. Output length is ceil(n * target / source),
    which keeps duration within one output sample.
    """
    if target_hz <= 0:
        raise InvalidRate(f"target_hz must be positive, got {target_hz}")
    if len(buf.samples) == 0:
        raise EmptyAudio("cannot resample an empty buffer")
    if target_hz == buf.sample_rate_hz:
        return buf

    g = math.gcd(buf.sample_rate_hz, target_hz)
    up = target_hz // g
    down = buf.sample_rate_hz // g

    # Kernel spans 32 zero-crossing intervals at the lower of the two rates,
    # so each polyphase branch sees _TAPS_PER_PHASE input samples.
    half_len = (_TAPS_PER_PHASE // 2) * max(up, down)
    h = firwin(2 * half_len + 1, 1.0 / max(up, down), window=("kaiser", _KAISER_BETA))
    h = h * up  # compensate zero-stuffing gain

    n_in = len(buf.samples)
    n_out = -(-n_in * up // down)  # ceil
    # align upfirdn output so index 0 corresponds to t=0 (group delay half_len)
    n_pre_pad = (down - half_len % down) % down
    n_pre_remove = (half_len + n_pre_pad) // down
    h_padded = np.concatenate([np.zeros(n_pre_pad), h])
    y = upfirdn(h_padded, buf.samples, up, down)
    if len(y) < n_pre_remove + n_out:
        y = np.concatenate([y, np.zeros(n_pre_remove + n_out - len(y))])
    y = y[n_pre_remove:n_pre_remove + n_out]
    # windowed sinc can overshoot slightly near sharp edges
    y = np.clip(y, -1.0, 1.0)
    return AudioBuffer(samples=y, sample_rate_hz=target_hz)


def chunk_audio(
    buf: AudioBuffer,
    source_id: str = "audio",
    chunk_seconds: float = DEFAULT_CHUNK_SECONDS,
    min_keep_fraction: float = DEFAULT_MIN_KEEP_FRACTION,
) -> list[Chunk]:
    """Cut consecutive non-overlapping fixed-length chunks.

    A trailing remainder is kept and zero-padded to full length iff its
    duration is at least min_keep_fraction * chunk_seconds; otherwise it is
    dropped. Short input yields an empty list, never an error.
    """
    if not 0 < min_keep_fraction <= 1:
        raise ValueError("min_keep_fraction must be in (0, 1]")
    if chunk_seconds <= 0:
        raise ValueError("chunk_seconds must be positive")

    chunk_len = int(round(chunk_seconds * buf.sample_rate_hz))
    if chunk_len == 0:
        return []
    x = buf.samples
    chunks: list[Chunk] = []
    n_full = len(x) // chunk_len
    for i in range(n_full):
        seg = x[i * chunk_len:(i + 1) * chunk_len]
        chunks.append(Chunk(
            samples=seg.copy(),
            sample_rate_hz=buf.sample_rate_hz,
            source_id=source_id,
            index=i,
            start_s=i * chunk_seconds,
        ))
    rem = x[n_full * chunk_len:]
    if len(rem) and len(rem) >= min_keep_fraction * chunk_seconds * buf.sample_rate_hz:
        seg = np.zeros(chunk_len, dtype=np.float64)
        seg[:len(rem)] = rem
        chunks.append(Chunk(
            samples=seg,
            sample_rate_hz=buf.sample_rate_hz,
            source_id=source_id,
            index=n_full,
            start_s=n_full * chunk_seconds,
            padded=True,
        ))
    return chunks
