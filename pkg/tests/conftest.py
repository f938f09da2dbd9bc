import struct

import numpy as np
import pytest

from avdkit.audio_io import AudioBuffer, Chunk, encode_wav_pcm16


def sine(freq_hz: float, seconds: float, rate: int, amplitude: float = 0.5) -> np.ndarray:
    t = np.arange(int(round(seconds * rate))) / rate
    return amplitude * np.sin(2 * np.pi * freq_hz * t)


def wav_pcm16(samples: np.ndarray, rate: int) -> bytes:
    return encode_wav_pcm16(samples, rate)


def wav_from_frames(frames: bytes, rate: int, channels: int, bits: int,
                    audio_format: int = 1) -> bytes:
    """Hand-rolled WAV container for decoder tests (any payload)."""
    block_align = channels * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(frames), b"WAVE",
        b"fmt ", 16, audio_format, channels, rate,
        rate * block_align, block_align, bits,
        b"data", len(frames),
    )
    return header + frames


def make_chunk(samples: np.ndarray, rate: int = 16000, source_id: str = "test",
               index: int = 0) -> Chunk:
    return Chunk(samples=np.asarray(samples, dtype=np.float64), sample_rate_hz=rate,
                 source_id=source_id, index=index, start_s=index * len(samples) / rate)


def random_speechy_chunk(rng: np.random.Generator, rate: int = 16000,
                         seconds: float = 2.5, amplitude: float = 0.05) -> Chunk:
    """Broadband noise chunk: every mel band carries energy above the log floor."""
    n = int(round(seconds * rate))
    samples = amplitude * rng.standard_normal(n)
    samples = np.clip(samples, -1.0, 1.0)
    return make_chunk(samples, rate=rate)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(1234))
