"""FastAPI application serving staged predictions over uploaded X-rays.

Uploads are parsed from multipart/form-data by hand (field name "image"),
capped at 10 MiB, never written to disk, and answered with the same staged
verdict the in-process predictor returns on identical bytes.
"""
from __future__ import annotations

import os
import re
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from ..cascade import PHASE_LABELS, CascadeModel, CascadeResult, cascade_predict
from ..datastore import bundle_digest, load_bundle
from ..features import load_extractor
from ..imageprep import DecodeError
from .schemas import HealthResponse, ModelInfoResponse, PhaseVerdict, PredictResponse

MAX_UPLOAD_BYTES = 10 * 1024 * 1024

__all__ = ["create_app", "MAX_UPLOAD_BYTES"]


class MultipartError(ValueError):
    pass


def parse_multipart(body: bytes, content_type: str) -> dict[str, bytes]:
    """Minimal multipart/form-data reader: returns field name -> raw bytes.

    Requires a terminated message (closing boundary); raises MultipartError
    on anything structurally off.
    """
    match = re.search(r'boundary="?([^";,]+)"?', content_type or "")
    if not match:
        raise MultipartError("missing multipart boundary")
    delimiter = b"--" + match.group(1).encode("utf-8")
    chunks = body.split(delimiter)
    if len(chunks) < 2 or not chunks[-1].lstrip(b"\r\n ").startswith(b"--"):
        raise MultipartError("multipart message is not terminated")
    fields: dict[str, bytes] = {}
    for chunk in chunks[1:-1]:
        if chunk.startswith(b"\r\n"):
            chunk = chunk[2:]
        head, sep, data = chunk.partition(b"\r\n\r\n")
        if not sep:
            raise MultipartError("multipart part lacks a header terminator")
        name_match = re.search(r'name="([^"]*)"', head.decode("latin-1"))
        if not name_match:
            raise MultipartError("multipart part lacks a field name")
        if data.endswith(b"\r\n"):
            data = data[:-2]
        fields[name_match.group(1)] = data
    return fields


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _phase_verdict(phase: int, score: float | None) -> PhaseVerdict | None:
    if score is None:
        return None
    negative, positive = PHASE_LABELS[phase]
    return PhaseVerdict(label=positive if score >= 0.0 else negative, score=score)


def result_to_response(result: CascadeResult, request_id: str, digest: str, timing_ms: float) -> PredictResponse:
    return PredictResponse(
        request_id=request_id,
        phase1=_phase_verdict(1, result.phase1_score),
        phase2=_phase_verdict(2, result.phase2_score),
        phase3=_phase_verdict(3, result.phase3_score),
        final_label=result.final_label,
        model_digest=digest,
        timing_ms=timing_ms,
    )


def create_app(
    bundle_path: str | None = None,
    model: CascadeModel | None = None,
    digest: str | None = None,
    cors_origins: tuple[str, ...] | None = None,
) -> FastAPI:
    """Build the service.

    The COVIDX_BUNDLE environment variable overrides bundle_path. With no
    bundle at all the app still serves, answering 503 everywhere, which is
    also the behavior while a configured bundle has not finished loading.
    """
    app = FastAPI(title="covidx", docs_url=None, redoc_url=None)
    origins = cors_origins or tuple(
        o.strip() for o in os.environ.get("COVIDX_CORS_ORIGINS", "*").split(",") if o.strip()
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(origins),
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    app.state.model = model
    app.state.digest = digest or ""
    app.state.extractor = load_extractor(model.extractor_spec) if model is not None else None

    env_path = os.environ.get("COVIDX_BUNDLE")
    path = env_path or bundle_path
    if model is None and path:
        loaded = load_bundle(Path(path))
        app.state.model = loaded
        app.state.digest = bundle_digest(Path(path))
        app.state.extractor = load_extractor(loaded.extractor_spec)

    def _not_loaded() -> JSONResponse:
        return _error(503, "model_not_loaded", "no model bundle is loaded")

    @app.get("/api/v1/health", response_model=HealthResponse)
    async def health():
        if app.state.model is None:
            return _not_loaded()
        return HealthResponse(status="ok", model_digest=app.state.digest)

    @app.get("/api/v1/model", response_model=ModelInfoResponse)
    async def model_info():
        if app.state.model is None:
            return _not_loaded()
        summary = app.state.model.manifest_summary()
        return ModelInfoResponse(model_digest=app.state.digest, **summary)

    @app.post("/api/v1/predict", response_model=PredictResponse)
    async def predict(request: Request):
        if app.state.model is None:
            return _not_loaded()
        started = time.perf_counter()
        body = await request.body()
        if len(body) > MAX_UPLOAD_BYTES:
            return _error(413, "payload_too_large", f"upload exceeds {MAX_UPLOAD_BYTES} bytes")
        try:
            fields = parse_multipart(body, request.headers.get("content-type", ""))
        except MultipartError as exc:
            return _error(400, "bad_multipart", str(exc))
        if "image" not in fields:
            return _error(400, "bad_multipart", 'multipart field "image" is required')
        try:
            result = cascade_predict(app.state.model, fields["image"], extractor=app.state.extractor)
        except DecodeError as exc:
            return _error(400, "decode_failed", str(exc))
        timing_ms = (time.perf_counter() - started) * 1000.0
        return result_to_response(result, uuid.uuid4().hex, app.state.digest, timing_ms)

    return app
