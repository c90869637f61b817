"""Wire formats for the prediction API."""
from __future__ import annotations

from typing import Optional

from pydantic import BaseModel


class PhaseVerdict(BaseModel):
    label: str
    score: float


class PredictResponse(BaseModel):
    request_id: str
    phase1: PhaseVerdict
    phase2: Optional[PhaseVerdict] = None
    phase3: Optional[PhaseVerdict] = None
    final_label: str
    model_digest: str
    timing_ms: float


class HealthResponse(BaseModel):
    status: str
    model_digest: str


class ModelInfoResponse(BaseModel):
    model_digest: str
    extractor_id: str
    extractor_spec: dict
    prep_config: dict
    prep_digest: str
    phases: list[dict]
