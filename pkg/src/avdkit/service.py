"""HTTP prediction service.

Endpoints:
    GET  /health   liveness + model identity (503 if the artifact failed to load)
    POST /predict  WAV upload (multipart field "audio" or raw audio/wav body),
                   optional ?rule=any|majority; returns chunk-level results
                   and the aggregate verdict
    GET  /model    artifact metadata

Errors are JSON {error_code, message} with statuses 400 (malformed audio),
413 (too large), 422 (too short after the remainder rule), 503 (no model).
The loaded artifact is immutable and shared read-only across requests.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .errors import (
    AudioTooShort,
    AvdError,
    DimMismatch,
    EmptyAudio,
    MalformedContainer,
    MissingEmbedding,
    ModelUnavailable,
    PayloadTooLarge,
    ProviderUnavailable,
    UnsupportedCodec,
)
from .model_store import load_pipeline
from .pipeline import AGGREGATION_RULES, Predictor, RULE_ANY

DEFAULT_MAX_UPLOAD_BYTES = 50 * 1024 * 1024
DEFAULT_CORS_ORIGINS = ("http://localhost:5173", "http://127.0.0.1:5173")


@dataclass
class ServiceConfig:
    artifact_path: str
    host: str = "127.0.0.1"
    port: int = 8000
    aggregation_rule: str = RULE_ANY
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD_BYTES
    cors_allowed_origins: tuple[str, ...] = DEFAULT_CORS_ORIGINS
    provider_url: str | None = None
    provider_command: list[str] | None = None

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        env = os.environ
        addr = env.get("ADDR", "127.0.0.1:8000")
        host, _, port = addr.rpartition(":")
        conf = dict(
            artifact_path=env.get("ARTIFACT_PATH", ""),
            host=host or "127.0.0.1",
            port=int(port) if port else 8000,
            aggregation_rule=env.get("RULE", RULE_ANY),
            max_upload_bytes=int(env.get("MAX_UPLOAD_BYTES", DEFAULT_MAX_UPLOAD_BYTES)),
        )
        if env.get("CORS_ORIGINS"):
            conf["cors_allowed_origins"] = tuple(
                o.strip() for o in env["CORS_ORIGINS"].split(",") if o.strip()
            )
        conf.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**conf)


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error_code": code, "message": message})


def create_app(config: ServiceConfig) -> FastAPI:
    """Build the app, attempting the artifact load up front.

    A failed load keeps the app serving 503s rather than crashing, so
    orchestration can probe /health; the CLI refuses to start instead.
    """
    app = FastAPI(title="avdkit prediction service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(config.cors_allowed_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    state = {"predictor": None, "load_error": None}
    try:
        artifact = load_pipeline(config.artifact_path)
        state["predictor"] = Predictor.from_artifact(
            artifact,
            provider_url=config.provider_url,
            provider_command=config.provider_command,
        )
    except Exception as exc:  # surfaced via 503s
        state["load_error"] = f"{type(exc).__name__}: {exc}"

    def predictor() -> Predictor:
        if state["predictor"] is None:
            raise ModelUnavailable(state["load_error"] or "no artifact loaded")
        return state["predictor"]

    @app.get("/health")
    def health():
        try:
            p = predictor()
        except ModelUnavailable as exc:
            return _error(503, "ModelUnavailable", str(exc))
        return {
            "status": "ok",
            "model_id": p.artifact.checksum,
            "format_version": p.artifact.format_version,
        }

    @app.get("/model")
    def model():
        try:
            p = predictor()
        except ModelUnavailable as exc:
            return _error(503, "ModelUnavailable", str(exc))
        a = p.artifact
        return {
            "model_id": a.checksum,
            "format_version": a.format_version,
            "provider_id": a.provider.provider_id,
            "provider_dim": a.provider.dim,
            "classifier_kind": a.classifier_kind,
            "train_seed": a.train_seed,
            "created_at": a.created_at,
            "metrics_snapshot": a.metrics_snapshot,
        }

    @app.post("/predict")
    async def predict(request: Request, rule: str | None = None):
        rule = rule or config.aggregation_rule
        if rule not in AGGREGATION_RULES:
            return _error(400, "InvalidRule",
                          f"rule must be one of {AGGREGATION_RULES}, got {rule!r}")
        try:
            p = predictor()
        except ModelUnavailable as exc:
            return _error(503, "ModelUnavailable", str(exc))

        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("audio")
            if upload is None or isinstance(upload, str):
                return _error(400, "MalformedAudio", 'multipart field "audio" missing')
            raw = await upload.read()
        else:
            raw = await request.body()

        if len(raw) > config.max_upload_bytes:
            return _error(413, "PayloadTooLarge",
                          f"{len(raw)} bytes exceeds limit {config.max_upload_bytes}")
        try:
            return p.predict_wav_bytes(raw, rule=rule, max_bytes=config.max_upload_bytes)
        except PayloadTooLarge as exc:
            return _error(413, "PayloadTooLarge", str(exc))
        except (MalformedContainer, UnsupportedCodec, EmptyAudio) as exc:
            return _error(400, "MalformedAudio", str(exc))
        except AudioTooShort as exc:
            return _error(422, "AudioTooShort", str(exc))
        except (ProviderUnavailable, MissingEmbedding, DimMismatch) as exc:
            return _error(503, "ProviderUnavailable", str(exc))
        except AvdError as exc:
            return _error(500, type(exc).__name__, str(exc))

    return app
