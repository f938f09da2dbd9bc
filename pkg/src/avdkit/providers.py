"""Embedding providers: fixed-dimension vectors per chunk.

Four kinds share one contract:

  internal     MFCC computed in-process (the baseline).
  mock         deterministic pseudo-random vectors keyed on chunk content,
               for hermetic tests and e2e wiring.
  precomputed  vectors looked up by chunk_id from an embedding file.
  external     heavyweight pre-trained networks running out of process,
               reached via line-delimited JSON over stdio or HTTP POST /embed
               (request: {chunk_id, sample_rate_hz, samples: base64 LE
               float32}; response: {chunk_id, dim, values} or {error}).

External networks are expected to return the time-averaged last-layer
embedding; their internals are opaque here. Known dimensions: xvector 512,
wavlm 768, unispeech_sat 768. ECAPA's dimension is caller-supplied.
"""

from __future__ import annotations

import base64
import hashlib
import json
import subprocess
import urllib.error
import urllib.request
from dataclasses import dataclass

import numpy as np

from .audio_io import Chunk
from .errors import DimMismatch, MissingEmbedding, ProviderUnavailable
from .mfcc import MfccConfig, compute_mfcc_frames, pool_frames

KIND_INTERNAL = "internal"
KIND_PRECOMPUTED = "precomputed"
KIND_EXTERNAL = "external"
KIND_MOCK = "mock"

KNOWN_EXTERNAL_DIMS = {"xvector": 512, "wavlm": 768, "unispeech_sat": 768}
EXTERNAL_PROVIDER_IDS = ("xvector", "ecapa", "wavlm", "unispeech_sat")

DEFAULT_MOCK_DIM = 512


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    dim: int
    provider_id: str
    chunk_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or len(values) != self.dim:
            raise DimMismatch(f"vector length {values.shape} != declared dim {self.dim}")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ProviderDescriptor:
    provider_id: str
    dim: int
    kind: str
    single_consumer: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("provider dim must be positive")
        known = KNOWN_EXTERNAL_DIMS.get(self.provider_id)
        if known is not None and self.dim != known:
            raise ValueError(f"{self.provider_id} dim must be {known}, got {self.dim}")


class EmbeddingProvider:
    """Base: subclasses implement _compute(chunk) -> 1-D array."""

    descriptor: ProviderDescriptor

    def embed(self, chunk: Chunk) -> FeatureVector:
        values = np.asarray(self._compute(chunk), dtype=np.float64)
        if values.ndim != 1 or len(values) != self.descriptor.dim:
            raise DimMismatch(
                f"provider {self.descriptor.provider_id} returned length "
                f"{values.size}, declared {self.descriptor.dim}"
            )
        return FeatureVector(
            values=values,
            dim=self.descriptor.dim,
            provider_id=self.descriptor.provider_id,
            chunk_id=chunk.chunk_id,
        )

    def _compute(self, chunk: Chunk) -> np.ndarray:
        raise NotImplementedError

    def close(self) -> None:
        pass


class MfccProvider(EmbeddingProvider):
    """In-process MFCC baseline; dim = n_mfcc (mean) or 2*n_mfcc (mean_std)."""

    def __init__(self, config: MfccConfig = MfccConfig()):
        self.config = config
        self.descriptor = ProviderDescriptor(
            provider_id="mfcc", dim=config.feature_dim(), kind=KIND_INTERNAL
        )

    def _compute(self, chunk: Chunk) -> np.ndarray:
        return pool_frames(compute_mfcc_frames(chunk, self.config), self.config.pooling)


class MockProvider(EmbeddingProvider):
    """Deterministic pseudo-random vectors derived from (seed, chunk content).

    The value depends only on the seed, the sample data (as float32), and the
    sample rate, so identical audio embeds identically across calls,
    processes, and chunk naming schemes.
    """

    def __init__(self, seed: int, dim: int = DEFAULT_MOCK_DIM):
        self.seed = int(seed)
        self.descriptor = ProviderDescriptor(
            provider_id=f"mock:{self.seed}", dim=dim, kind=KIND_MOCK
        )

    def _compute(self, chunk: Chunk) -> np.ndarray:
        digest = hashlib.sha256()
        digest.update(str(self.seed).encode())
        digest.update(np.asarray(chunk.samples, dtype="<f4").tobytes())
        digest.update(str(chunk.sample_rate_hz).encode())
        rng_seed = int.from_bytes(digest.digest()[:8], "little")
        rng = np.random.Generator(np.random.PCG64(rng_seed))
        # float32 round-trip keeps values exactly representable in files
        return rng.standard_normal(self.descriptor.dim).astype(np.float32).astype(np.float64)


class PrecomputedProvider(EmbeddingProvider):
    """Vectors looked up by chunk_id from an embedding file on disk."""

    def __init__(self, path: str):
        from .embedding_file import read_embedding_file

        self.path = str(path)
        table = read_embedding_file(self.path)
        if not table:
            raise MissingEmbedding(f"{self.path} holds no records")
        first = next(iter(table.values()))
        self._table = table
        self.descriptor = ProviderDescriptor(
            provider_id=f"precomputed:{self.path}", dim=first.dim, kind=KIND_PRECOMPUTED
        )

    def _compute(self, chunk: Chunk) -> np.ndarray:
        record = self._table.get(chunk.chunk_id)
        if record is None:
            raise MissingEmbedding(f"{self.path} has no embedding for {chunk.chunk_id!r}")
        return record.values


def _chunk_request(chunk: Chunk) -> dict:
    payload = np.asarray(chunk.samples, dtype="<f4").tobytes()
    return {
        "chunk_id": chunk.chunk_id,
        "sample_rate_hz": chunk.sample_rate_hz,
        "samples": base64.b64encode(payload).decode("ascii"),
    }


def _parse_response(raw: str | bytes, provider_id: str) -> np.ndarray:
    try:
        reply = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ProviderUnavailable(f"{provider_id}: unparseable reply: {exc}") from exc
    if "error" in reply:
        raise ProviderUnavailable(f"{provider_id}: {reply['error']}")
    values = np.asarray(reply.get("values", []), dtype=np.float64)
    declared = reply.get("dim")
    if declared is not None and declared != len(values):
        raise DimMismatch(f"{provider_id}: reply dim {declared} != {len(values)} values")
    return values


class HttpProvider(EmbeddingProvider):
    """External provider behind HTTP POST {url}/embed, one request per chunk."""

    def __init__(self, provider_id: str, url: str, dim: int | None = None,
                 timeout_s: float = 30.0):
        dim = dim if dim is not None else KNOWN_EXTERNAL_DIMS.get(provider_id)
        if dim is None:
            raise ValueError(f"dimension for {provider_id} must be supplied")
        self.url = url.rstrip("/") + "/embed"
        self.timeout_s = timeout_s
        self.descriptor = ProviderDescriptor(provider_id=provider_id, dim=dim,
                                             kind=KIND_EXTERNAL)

    def _compute(self, chunk: Chunk) -> np.ndarray:
        body = json.dumps(_chunk_request(chunk)).encode()
        req = urllib.request.Request(
            self.url, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout_s) as resp:
                raw = resp.read()
        except (urllib.error.URLError, OSError) as exc:
            raise ProviderUnavailable(f"{self.descriptor.provider_id}: {exc}") from exc
        return _parse_response(raw, self.descriptor.provider_id)


class SubprocessProvider(EmbeddingProvider):
    """External provider spoken to over stdio, one JSON line per chunk.

    The child process reads one request per line and must answer with one
    response line. Single-consumer: callers must not interleave requests."""

    def __init__(self, provider_id: str, command: list[str], dim: int | None = None):
        dim = dim if dim is not None else KNOWN_EXTERNAL_DIMS.get(provider_id)
        if dim is None:
            raise ValueError(f"dimension for {provider_id} must be supplied")
        self.descriptor = ProviderDescriptor(
            provider_id=provider_id, dim=dim, kind=KIND_EXTERNAL, single_consumer=True
        )
        try:
            self._proc = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True
            )
        except OSError as exc:
            raise ProviderUnavailable(f"{provider_id}: cannot spawn {command!r}: {exc}") from exc

    def _compute(self, chunk: Chunk) -> np.ndarray:
        if self._proc.poll() is not None:
            raise ProviderUnavailable(
                f"{self.descriptor.provider_id}: process exited "
                f"with {self._proc.returncode}"
            )
        try:
            self._proc.stdin.write(json.dumps(_chunk_request(chunk)) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ProviderUnavailable(f"{self.descriptor.provider_id}: {exc}") from exc
        if not line:
            raise ProviderUnavailable(f"{self.descriptor.provider_id}: process closed stdout")
        return _parse_response(line, self.descriptor.provider_id)

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=10)


def embed(provider: EmbeddingProvider, chunk: Chunk) -> FeatureVector:
    """Functional alias for provider.embed(chunk)."""
    return provider.embed(chunk)


def make_provider(
    provider_id: str,
    mfcc_config: MfccConfig | None = None,
    dim: int | None = None,
    url: str | None = None,
    command: list[str] | None = None,
) -> EmbeddingProvider:
    """Build a provider from its id string.

    Accepted ids: "mfcc", "mock:<seed>", "precomputed:<path>", or one of the
    external names (xvector, ecapa, wavlm, unispeech_sat), which additionally
    need url= or command=.
    """
    if provider_id == "mfcc":
        return MfccProvider(mfcc_config or MfccConfig())
    if provider_id.startswith("mock:"):
        seed = int(provider_id.split(":", 1)[1])
        return MockProvider(seed, dim=dim or DEFAULT_MOCK_DIM)
    if provider_id.startswith("precomputed:"):
        return PrecomputedProvider(provider_id.split(":", 1)[1])
    if provider_id in EXTERNAL_PROVIDER_IDS:
        if url:
            return HttpProvider(provider_id, url, dim=dim)
        if command:
            return SubprocessProvider(provider_id, command, dim=dim)
        raise ProviderUnavailable(
            f"{provider_id} runs out of process; pass url= or command="
        )
    raise ValueError(f"unknown provider id {provider_id!r}")
