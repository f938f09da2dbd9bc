"""Shared prediction path: decoded audio to chunk labels to a file verdict.

The CLI `predict` command and the HTTP service both run this code, so their
outputs are identical on identical bytes. Timing starts after decode (the
reported figure is feature extraction + classification + aggregation).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from . import audio_io
from .audio_io import AudioBuffer, decode_wav
from .errors import AudioTooShort, EmptyChunks
from .mfcc import MfccConfig
from .model_store import PipelineArtifact
from .providers import EmbeddingProvider, make_provider

TARGET_SAMPLE_RATE_HZ = 16_000

VERDICT_VIOLENCE = "violence"
VERDICT_NON_VIOLENCE = "non-violence"

RULE_ANY = "any"
RULE_MAJORITY = "majority"
AGGREGATION_RULES = (RULE_ANY, RULE_MAJORITY)


def aggregate_verdict(chunk_labels, rule: str = RULE_ANY) -> str:
    """File-level verdict from chunk labels.

    any: violence iff at least one chunk is violent. majority: violence iff
    violent chunks outnumber half; ties resolve to non-violence.
    """
    labels = list(chunk_labels)
    if not labels:
        raise EmptyChunks("no chunk labels to aggregate")
    if rule == RULE_ANY:
        return VERDICT_VIOLENCE if any(l == 1 for l in labels) else VERDICT_NON_VIOLENCE
    if rule == RULE_MAJORITY:
        violent = sum(1 for l in labels if l == 1)
        return VERDICT_VIOLENCE if violent > len(labels) - violent else VERDICT_NON_VIOLENCE
    raise ValueError(f"unknown aggregation rule {rule!r}")


@dataclass
class Predictor:
    artifact: PipelineArtifact
    provider: EmbeddingProvider
    chunk_seconds: float = audio_io.DEFAULT_CHUNK_SECONDS
    min_keep_fraction: float = audio_io.DEFAULT_MIN_KEEP_FRACTION

    @classmethod
    def from_artifact(
        cls,
        artifact: PipelineArtifact,
        provider_url: str | None = None,
        provider_command: list[str] | None = None,
    ) -> "Predictor":
        provider = make_provider(
            artifact.provider.provider_id,
            mfcc_config=artifact.mfcc_config or MfccConfig(),
            dim=artifact.provider.dim,
            url=provider_url,
            command=provider_command,
        )
        return cls(artifact=artifact, provider=provider)

    def predict_buffer(self, buf: AudioBuffer, rule: str = RULE_ANY) -> dict:
        started = time.perf_counter()
        resampled = audio_io.resample(buf, TARGET_SAMPLE_RATE_HZ)
        chunks = audio_io.chunk_audio(
            resampled, source_id="request",
            chunk_seconds=self.chunk_seconds,
            min_keep_fraction=self.min_keep_fraction,
        )
        if not chunks:
            raise AudioTooShort(
                f"{buf.duration_s:.3f} s of audio yields no "
                f"{self.chunk_seconds} s chunks (keep threshold "
                f"{self.min_keep_fraction * self.chunk_seconds} s)"
            )
        model = self.artifact.classifier_payload
        chunk_results = []
        for chunk in chunks:
            vector = self.provider.embed(chunk)
            pred = model.predict(vector.values)
            chunk_results.append({
                "index": chunk.index,
                "start_s": chunk.start_s,
                "end_s": chunk.start_s + self.chunk_seconds,
                "label": pred.label,
                "score": pred.score,
            })
        verdict = aggregate_verdict([c["label"] for c in chunk_results], rule)
        inference_ms = (time.perf_counter() - started) * 1000.0
        return {
            "verdict": verdict,
            "chunk_results": chunk_results,
            "inference_ms": inference_ms,
            "model_id": self.artifact.checksum,
            "provider_id": self.artifact.provider.provider_id,
            "rule": rule,
        }

    def predict_wav_bytes(self, raw: bytes, rule: str = RULE_ANY,
                          max_bytes: int = audio_io.DEFAULT_MAX_WAV_BYTES) -> dict:
        return self.predict_buffer(decode_wav(raw, max_bytes=max_bytes), rule)
