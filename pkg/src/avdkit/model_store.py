"""Versioned, checksummed persistence of trained pipelines.

An artifact file (".avdm") is a JSON envelope: {"crc32": <hex>, "payload":
{...}} where the checksum covers the canonical serialization of the payload
(sorted keys, compact separators). Numeric arrays are embedded as base64
little-endian float64, so classifier parameters round-trip exactly and the
file stays diffable text. Writes are atomic (temp file + rename); files are
immutable once written.
"""

from __future__ import annotations

import base64
import json
import os
import tempfile
import zlib
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .errors import CorruptArtifact, InconsistentDims, IoFailure, UnsupportedVersion
from .forest import RandomForestModel, RfConfig, Tree
from .mfcc import MfccConfig
from .providers import ProviderDescriptor
from .svm import SvmModel

FORMAT_VERSION = 1
ARTIFACT_EXTENSION = ".avdm"


@dataclass(frozen=True)
class PipelineArtifact:
    provider: ProviderDescriptor
    classifier_kind: str  # "rf" | "svm"
    classifier_payload: RandomForestModel | SvmModel
    train_seed: int
    created_at: str  # UTC ISO-8601
    mfcc_config: MfccConfig | None = None
    metrics_snapshot: dict | None = None
    format_version: int = FORMAT_VERSION
    checksum: str | None = None  # filled on save/load; not part of the payload


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _encode_array(arr) -> str:
    return base64.b64encode(np.asarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode_array(s: str, dtype=np.float64) -> np.ndarray:
    try:
        raw = base64.b64decode(s.encode("ascii"), validate=True)
    except Exception as exc:
        raise CorruptArtifact(f"bad base64 array: {exc}") from exc
    if len(raw) % 8:
        raise CorruptArtifact("array byte length not a multiple of 8")
    values = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if dtype is np.float64:
        return values
    cast = values.astype(dtype)
    if not np.array_equal(cast.astype(np.float64), values):
        raise CorruptArtifact("array holds non-integral values for an integer field")
    return cast


def _classifier_to_payload(kind: str, model) -> dict:
    if kind == "rf":
        cfg = model.config
        return {
            "n_features": model.n_features,
            "train_seed": model.train_seed,
            "config": {
                "n_trees": cfg.n_trees,
                "max_features": cfg.max_features,
                "min_samples_split": cfg.min_samples_split,
                "min_samples_leaf": cfg.min_samples_leaf,
                "max_depth": cfg.max_depth,
                "bootstrap": cfg.bootstrap,
            },
            "trees": [
                {
                    "feature": _encode_array(t.feature),
                    "threshold": _encode_array(t.threshold),
                    "left": _encode_array(t.left),
                    "right": _encode_array(t.right),
                    "counts": _encode_array(t.counts.reshape(-1)),
                }
                for t in model.trees
            ],
        }
    if kind == "svm":
        return {
            "n_features": model.n_features,
            "n_support": len(model.dual_coefs),
            "support_vectors": _encode_array(model.support_vectors.reshape(-1)),
            "dual_coefs": _encode_array(model.dual_coefs),
            "bias": model.bias,
            "gamma": model.gamma,
            "converged": model.converged,
        }
    raise ValueError(f"unknown classifier kind {kind!r}")


def _classifier_from_payload(kind: str, payload: dict):
    try:
        if kind == "rf":
            cfg = RfConfig(**payload["config"])
            trees = []
            for t in payload["trees"]:
                counts = _decode_array(t["counts"], np.int64)
                trees.append(Tree(
                    feature=_decode_array(t["feature"], np.int64),
                    threshold=_decode_array(t["threshold"]),
                    left=_decode_array(t["left"], np.int64),
                    right=_decode_array(t["right"], np.int64),
                    counts=counts.reshape(-1, 2),
                ))
            return RandomForestModel(
                trees=trees,
                config=cfg,
                train_seed=payload["train_seed"],
                n_features=payload["n_features"],
            )
        if kind == "svm":
            m = payload["n_support"]
            d = payload["n_features"]
            sv = _decode_array(payload["support_vectors"])
            if sv.size != m * d:
                raise CorruptArtifact(f"support vector array has {sv.size} values, expected {m * d}")
            return SvmModel(
                support_vectors=sv.reshape(m, d),
                dual_coefs=_decode_array(payload["dual_coefs"]),
                bias=float(payload["bias"]),
                gamma=float(payload["gamma"]),
                converged=bool(payload["converged"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"malformed classifier payload: {exc}") from exc
    raise CorruptArtifact(f"unknown classifier kind {kind!r}")


def _artifact_payload(artifact: PipelineArtifact) -> dict:
    mfcc = None
    if artifact.mfcc_config is not None:
        c = artifact.mfcc_config
        mfcc = {
            "frame_ms": c.frame_ms, "hop_ms": c.hop_ms, "n_fft": c.n_fft,
            "n_mels": c.n_mels, "n_mfcc": c.n_mfcc, "fmin_hz": c.fmin_hz,
            "fmax_hz": c.fmax_hz, "pre_emphasis": c.pre_emphasis,
            "log_floor": c.log_floor, "pooling": c.pooling,
        }
    return {
        "format_version": artifact.format_version,
        "provider": {
            "provider_id": artifact.provider.provider_id,
            "dim": artifact.provider.dim,
            "kind": artifact.provider.kind,
            "single_consumer": artifact.provider.single_consumer,
        },
        "mfcc_config": mfcc,
        "classifier_kind": artifact.classifier_kind,
        "classifier": _classifier_to_payload(artifact.classifier_kind,
                                             artifact.classifier_payload),
        "train_seed": artifact.train_seed,
        "created_at": artifact.created_at,
        "metrics_snapshot": artifact.metrics_snapshot,
    }


def _canonical(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def save_pipeline(artifact: PipelineArtifact, path: str) -> str:
    """Write the artifact atomically; returns the 8-hex-digit CRC32 checksum."""
    payload = _artifact_payload(artifact)
    checksum = f"{zlib.crc32(_canonical(payload)):08x}"
    doc = json.dumps({"crc32": checksum, "payload": payload},
                     sort_keys=True, separators=(",", ":")) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(doc)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write artifact to {path}: {exc}") from exc
    return checksum


def load_pipeline(path: str) -> PipelineArtifact:
    """Read and validate an artifact: checksum, version, dims."""
    try:
        with open(path, "r") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read artifact {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CorruptArtifact(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "crc32" not in doc or "payload" not in doc:
        raise CorruptArtifact(f"{path}: missing crc32/payload envelope")
    payload = doc["payload"]
    checksum = f"{zlib.crc32(_canonical(payload)):08x}"
    if checksum != doc["crc32"]:
        raise CorruptArtifact(f"{path}: checksum mismatch "
                              f"(stored {doc['crc32']}, computed {checksum})")

    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"{path}: format_version {version} not supported")

    try:
        prov = payload["provider"]
        provider = ProviderDescriptor(
            provider_id=prov["provider_id"], dim=prov["dim"], kind=prov["kind"],
            single_consumer=prov.get("single_consumer", False),
        )
        mfcc_config = None
        if payload["mfcc_config"] is not None:
            mfcc_config = MfccConfig(**payload["mfcc_config"])
        kind = payload["classifier_kind"]
        model = _classifier_from_payload(kind, payload["classifier"])
        artifact = PipelineArtifact(
            provider=provider,
            classifier_kind=kind,
            classifier_payload=model,
            train_seed=payload["train_seed"],
            created_at=payload["created_at"],
            mfcc_config=mfcc_config,
            metrics_snapshot=payload["metrics_snapshot"],
            format_version=version,
            checksum=checksum,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArtifact(f"{path}: malformed payload: {exc}") from exc

    _check_dims(artifact)
    return artifact


def _check_dims(artifact: PipelineArtifact) -> None:
    dim = artifact.provider.dim
    model = artifact.classifier_payload
    if isinstance(model, SvmModel):
        if model.n_features != dim:
            raise InconsistentDims(
                f"SVM expects {model.n_features} features, provider dim is {dim}"
            )
    else:
        if model.n_features != dim:
            raise InconsistentDims(
                f"forest expects {model.n_features} features, provider dim is {dim}"
            )
        for i, t in enumerate(model.trees):
            internal = t.feature[t.feature >= 0]
            if internal.size and internal.max() >= dim:
                raise InconsistentDims(f"tree {i} splits on feature {int(internal.max())}, "
                                       f"provider dim is {dim}")


def with_checksum(artifact: PipelineArtifact, checksum: str) -> PipelineArtifact:
    return replace(artifact, checksum=checksum)
