"""From-scratch MFCC extraction.

Pipeline: pre-emphasis -> 25 ms frames / 10 ms hop with a Hamming window ->
power spectrum |FFT|^2 -> triangular mel filterbank -> natural log with a
floor -> orthonormal DCT-II, keeping the first n_mfcc coefficients.

Because the DCT is orthonormal, a positive amplitude scaling of the input
shifts every log-mel bin by the same constant and lands entirely in
coefficient 0; coefficients 1.. are amplitude-invariant (while all mel
energies stay above the floor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .audio_io import Chunk
from .errors import ChunkTooShort, EmptyFrames, InvalidConfig

POOLING_MEAN = "mean"
POOLING_MEAN_STD = "mean_std"


@dataclass(frozen=True)
class MfccConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    n_fft: int = 512
    n_mels: int = 26
    n_mfcc: int = 13
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None -> Nyquist
    pre_emphasis: float = 0.97
    log_floor: float = 1e-10
    pooling: str = POOLING_MEAN_STD

    def resolve_fmax(self, sample_rate_hz: int) -> float:
        return self.fmax_hz if self.fmax_hz is not None else sample_rate_hz / 2.0

    def frame_len(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_ms * sample_rate_hz / 1000.0))

    def hop_len(self, sample_rate_hz: int) -> int:
        return int(round(self.hop_ms * sample_rate_hz / 1000.0))

    def feature_dim(self) -> int:
        return self.n_mfcc * (2 if self.pooling == POOLING_MEAN_STD else 1)

    def validate(self, sample_rate_hz: int) -> None:
        if self.pooling not in (POOLING_MEAN, POOLING_MEAN_STD):
            raise InvalidConfig(f"unknown pooling {self.pooling!r}")
        if self.n_mfcc > self.n_mels:
            raise InvalidConfig("n_mfcc must not exceed n_mels")
        if self.n_mfcc < 1 or self.n_mels < 1:
            raise InvalidConfig("n_mfcc and n_mels must be positive")
        if self.n_fft < self.frame_len(sample_rate_hz):
            raise InvalidConfig("n_fft smaller than the frame length")
        fmax = self.resolve_fmax(sample_rate_hz)
        if not self.fmin_hz < fmax <= sample_rate_hz / 2.0:
            raise InvalidConfig("need fmin_hz < fmax_hz <= Nyquist")
        if self.log_floor <= 0:
            raise InvalidConfig("log_floor must be positive")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(cfg: MfccConfig, sample_rate_hz: int) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, n_fft // 2 + 1).

    Band edges are equally spaced on the mel scale and snapped to FFT bins;
    each row rises linearly to exactly 1.0 at its center bin and falls back
    to zero, so support is one contiguous bin range per filter.
    """
    cfg.validate(sample_rate_hz)
    fmax = cfg.resolve_fmax(sample_rate_hz)
    mel_pts = np.linspace(hz_to_mel(cfg.fmin_hz), hz_to_mel(fmax), cfg.n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    bins = np.floor((cfg.n_fft + 1) * hz_pts / sample_rate_hz).astype(int)
    if np.any(np.diff(bins[1:-1]) < 1):
        raise InvalidConfig(
            "mel centers collide at this FFT resolution; lower n_mels or raise n_fft"
        )

    fb = np.zeros((cfg.n_mels, cfg.n_fft // 2 + 1))
    for j in range(cfg.n_mels):
        lo, center, hi = bins[j], bins[j + 1], bins[j + 2]
        for i in range(lo, center):
            fb[j, i] = (i - lo) / (center - lo)
        for i in range(center, hi):
            fb[j, i] = (hi - i) / (hi - center)
        fb[j, center] = 1.0
    return fb


def compute_mfcc_frames(chunk: Chunk, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    """MFCC matrix for one chunk, shape (n_frames, n_mfcc)."""
    cfg.validate(chunk.sample_rate_hz)
    x = np.asarray(chunk.samples, dtype=np.float64)
    frame = cfg.frame_len(chunk.sample_rate_hz)
    hop = cfg.hop_len(chunk.sample_rate_hz)
    if len(x) < frame:
        raise ChunkTooShort(f"{len(x)} samples < one {frame}-sample frame")

    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - cfg.pre_emphasis * x[:-1]

    frames = np.lib.stride_tricks.sliding_window_view(y, frame)[::hop]
    window = np.hamming(frame)
    spectrum = np.fft.rfft(frames * window, n=cfg.n_fft, axis=1)
    power = np.abs(spectrum) ** 2

    fb = mel_filterbank(cfg, chunk.sample_rate_hz)
    mel_energy = power @ fb.T
    log_mel = np.log(np.maximum(mel_energy, cfg.log_floor))
    return dct(log_mel, type=2, norm="ortho", axis=1)[:, :cfg.n_mfcc]


def pool_frames(frames: np.ndarray, mode: str = POOLING_MEAN_STD) -> np.ndarray:
    """Collapse a frame matrix to one vector: per-column mean, optionally
    concatenated with the per-column population standard deviation."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise EmptyFrames("need at least one frame to pool")
    mean = frames.mean(axis=0)
    if mode == POOLING_MEAN:
        return mean
    if mode == POOLING_MEAN_STD:
        return np.concatenate([mean, frames.std(axis=0)])
    raise InvalidConfig(f"unknown pooling {mode!r}")
