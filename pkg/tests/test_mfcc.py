import numpy as np
import pytest
from scipy.fft import dct

from avdkit.errors import ChunkTooShort, EmptyFrames, InvalidConfig
from avdkit.mfcc import MfccConfig, compute_mfcc_frames, mel_filterbank, pool_frames

from conftest import make_chunk, random_speechy_chunk, sine


class TestMelFilterbank:
    def test_shape(self):
        fb = mel_filterbank(MfccConfig(), 16000)
        assert fb.shape == (26, 257)

    def test_unit_peak_rows(self):
        fb = mel_filterbank(MfccConfig(), 16000)
        assert np.allclose(fb.max(axis=1), 1.0, atol=1e-9)

    def test_rows_nonnegative(self):
        fb = mel_filterbank(MfccConfig(), 16000)
        assert np.all(fb >= 0.0)

    def test_centers_monotonic(self):
        fb = mel_filterbank(MfccConfig(), 16000)
        centers = fb.argmax(axis=1)
        assert np.all(np.diff(centers) > 0)

    def test_contiguous_support(self):
        fb = mel_filterbank(MfccConfig(), 16000)
        for row in fb:
            nz = np.nonzero(row)[0]
            assert len(nz) >= 1
            assert np.array_equal(nz, np.arange(nz[0], nz[-1] + 1))

    def test_mel_spacing_matches_formula(self):
        # center frequencies sit near equally spaced mel points
        cfg = MfccConfig()
        fb = mel_filterbank(cfg, 16000)
        centers_hz = fb.argmax(axis=1) * 16000 / cfg.n_fft
        mels = 2595.0 * np.log10(1.0 + centers_hz / 700.0)
        spacing = np.diff(mels)
        assert np.std(spacing) / np.mean(spacing) < 0.2  # bin snapping jitter only

    def test_invalid_configs(self):
        with pytest.raises(InvalidConfig):
            mel_filterbank(MfccConfig(n_mfcc=30), 16000)  # n_mfcc > n_mels
        with pytest.raises(InvalidConfig):
            mel_filterbank(MfccConfig(fmin_hz=9000.0), 16000)  # fmin >= fmax
        with pytest.raises(InvalidConfig):
            mel_filterbank(MfccConfig(fmax_hz=9000.0), 16000)  # beyond Nyquist
        with pytest.raises(InvalidConfig):
            mel_filterbank(MfccConfig(n_mels=300), 16000)  # centers collide


class TestComputeMfccFrames:
    def test_frame_count_for_full_chunk(self):
        chunk = make_chunk(np.zeros(40000))
        frames = compute_mfcc_frames(chunk)
        assert frames.shape == (248, 13)  # 1 + (40000-400)//160

    def test_all_zero_chunk_constant_rows(self):
        frames = compute_mfcc_frames(make_chunk(np.zeros(40000)))
        assert np.allclose(frames, frames[0])

    def test_too_short(self):
        with pytest.raises(ChunkTooShort):
            compute_mfcc_frames(make_chunk(np.zeros(399)))

    def test_scaling_moves_only_coefficient_zero(self, rng):
        chunk = random_speechy_chunk(rng)
        scaled = make_chunk(chunk.samples * 10.0)
        a = compute_mfcc_frames(chunk)
        b = compute_mfcc_frames(scaled)
        assert np.max(np.abs(a[:, 1:] - b[:, 1:])) < 1e-6
        assert np.all(b[:, 0] > a[:, 0])  # energy coefficient grows

    def test_scaling_shift_matches_theory(self, rng):
        # brute-force check: a constant shift of 2*ln(10) across log-mel bins
        # lands on coefficient 0 as 2*ln(10)*sqrt(n_mels)
        chunk = random_speechy_chunk(rng)
        scaled = make_chunk(chunk.samples * 10.0)
        a = compute_mfcc_frames(chunk)
        b = compute_mfcc_frames(scaled)
        # orthonormal DCT-II coefficient 0 of a constant c over N bins is c*sqrt(N)
        shift = 2.0 * np.log(10.0) * np.sqrt(26)
        assert np.allclose(b[:, 0] - a[:, 0], shift, atol=1e-6)

    def test_direct_recomputation_oracle(self, rng):
        # independent re-derivation of the whole pipeline for one frame
        cfg = MfccConfig()
        chunk = random_speechy_chunk(rng, seconds=0.05)  # 800 samples -> 3 frames
        frames = compute_mfcc_frames(chunk, cfg)

        x = chunk.samples
        pre = np.concatenate([[x[0]], x[1:] - 0.97 * x[:-1]])
        frame0 = pre[:400] * np.hamming(400)
        power = np.abs(np.fft.rfft(frame0, 512)) ** 2
        fb = mel_filterbank(cfg, 16000)
        logmel = np.log(np.maximum(power @ fb.T, 1e-10))
        coeffs = dct(logmel, type=2, norm="ortho")[:13]
        assert np.allclose(frames[0], coeffs, atol=1e-10)

    def test_padded_tail_frames_hit_floor(self):
        # zero tail behaves like silence: identical to the all-zero chunk rows
        samples = np.zeros(40000)
        samples[:20000] = sine(440, 1.25, 16000)
        frames = compute_mfcc_frames(make_chunk(samples))
        silent = compute_mfcc_frames(make_chunk(np.zeros(40000)))
        assert np.allclose(frames[-10:], silent[:10])


class TestPoolFrames:
    def test_single_frame_mean_std(self):
        out = pool_frames(np.array([[1.0, 2.0, 3.0]]), "mean_std")
        assert np.array_equal(out, [1.0, 2.0, 3.0, 0.0, 0.0, 0.0])

    def test_mean(self):
        out = pool_frames(np.array([[1.0, 3.0], [3.0, 1.0]]), "mean")
        assert np.array_equal(out, [2.0, 2.0])

    def test_mean_std_population(self):
        out = pool_frames(np.array([[0.0, 0.0], [2.0, 2.0]]), "mean_std")
        assert np.array_equal(out, [1.0, 1.0, 1.0, 1.0])

    def test_empty(self):
        with pytest.raises(EmptyFrames):
            pool_frames(np.zeros((0, 13)))

    def test_dims(self):
        frames = np.random.default_rng(0).normal(size=(10, 13))
        assert pool_frames(frames, "mean").shape == (13,)
        assert pool_frames(frames, "mean_std").shape == (26,)
