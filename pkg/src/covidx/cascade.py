"""Three-phase staged classifier: healthy gate, COVID-vs-pneumonia, severity.

Each phase is an independently grid-searched binary model over one shared
feature extractor. Prediction short-circuits: a negative phase-1 verdict
ends at Healthy, a negative phase-2 verdict at Pneumonia, and phase 3
grades remaining cases COVID-Low or COVID-High. Ties at score 0 go to the
positive class of that phase.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .features import ExtractorSpec, FeatureVector, load_extractor
from .imageprep import PrepConfig, preprocess
from .learners import LabeledDataset, fit_model, model_scores
from .learners.grid import DEFAULT_GRIDS, grid_search
from .metrics_eval import ClassTooSmall, confusion, f1, pr_auc, roc_auc

__all__ = [
    "LABEL_HEALTHY",
    "LABEL_PNEUMONIA",
    "LABEL_COVID_LOW",
    "LABEL_COVID_HIGH",
    "FINAL_LABELS",
    "PHASE_LABELS",
    "ExtractorMismatch",
    "FeatureSet",
    "TrainSpec",
    "PhaseModel",
    "CascadeModel",
    "CascadeResult",
    "build_phase_datasets",
    "cascade_train",
    "cascade_predict",
    "predict_from_features",
    "prep_config_digest",
    "CONFUSION_ORDER",
    "evaluate_cascade",
]

LABEL_HEALTHY = "Healthy"
LABEL_PNEUMONIA = "Pneumonia"
LABEL_COVID_LOW = "COVID-Low"
LABEL_COVID_HIGH = "COVID-High"
FINAL_LABELS = (LABEL_HEALTHY, LABEL_PNEUMONIA, LABEL_COVID_LOW, LABEL_COVID_HIGH)

# Per-phase (negative label, positive label) under the shared tie rule.
PHASE_LABELS = {
    1: ("Healthy", "Unhealthy"),
    2: ("Pneumonia", "COVID"),
    3: ("COVID-Low", "COVID-High"),
}


class ExtractorMismatch(RuntimeError):
    """Feature vector or extractor does not match the model's extractor."""


@dataclass(frozen=True)
class FeatureSet:
    """Feature rows for one class of images, keyed by provenance ids."""

    ids: tuple[str, ...]
    X: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        if X.ndim != 2:
            raise ValueError("X must be 2-D")
        if not np.all(np.isfinite(X)):
            raise ValueError("X must be finite")
        if len(self.ids) != X.shape[0]:
            raise ValueError("ids and X row count must match")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @classmethod
    def from_vectors(cls, ids: Sequence[str], vectors: Sequence[FeatureVector]) -> "FeatureSet":
        if len(vectors) == 0:
            return cls(ids=tuple(ids), X=np.zeros((0, 0)))
        first = vectors[0].extractor_id
        for v in vectors:
            if v.extractor_id != first:
                raise ExtractorMismatch(f"mixed extractors: {first!r} vs {v.extractor_id!r}")
        return cls(ids=tuple(ids), X=np.stack([v.values for v in vectors]))


@dataclass(frozen=True)
class TrainSpec:
    """How to train every phase: one classifier family, one grid (None means
    the family's default grid), shared CV settings."""

    kind: str = "svm"
    grid: tuple[dict, ...] | None = None
    k: int = 10
    metric: str = "f1"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULT_GRIDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.grid is not None:
            object.__setattr__(self, "grid", tuple(dict(g) for g in self.grid))

    def resolved_grid(self) -> tuple[dict, ...]:
        return self.grid if self.grid is not None else DEFAULT_GRIDS[self.kind]


@dataclass(frozen=True)
class PhaseModel:
    kind: str
    model: object

    def score(self, X: np.ndarray) -> np.ndarray:
        return model_scores(self.kind, self.model, X)

    def score_one(self, x: np.ndarray) -> float:
        return float(self.score(np.atleast_2d(x))[0])


@dataclass(frozen=True)
class CascadeModel:
    phase1: PhaseModel
    phase2: PhaseModel
    phase3: PhaseModel
    extractor_spec: ExtractorSpec
    extractor_id: str
    prep_config: PrepConfig
    phase_summaries: tuple[dict, dict, dict]
    """Per-phase chosen hyperparameters and their CV metric snapshot."""

    @property
    def prep_digest(self) -> str:
        return prep_config_digest(self.prep_config)

    def manifest_summary(self) -> dict:
        return {
            "extractor_id": self.extractor_id,
            "extractor_spec": self.extractor_spec.to_dict(),
            "prep_config": self.prep_config.to_dict(),
            "prep_digest": self.prep_digest,
            "phases": [dict(s) for s in self.phase_summaries],
        }


@dataclass(frozen=True)
class CascadeResult:
    final_label: str
    phase1_score: float
    phase2_score: Optional[float] = None
    phase3_score: Optional[float] = None

    def __post_init__(self):
        if self.final_label not in FINAL_LABELS:
            raise ValueError(f"final_label must be one of {FINAL_LABELS}")
        unhealthy = self.final_label != LABEL_HEALTHY
        if (self.phase2_score is not None) != unhealthy:
            raise ValueError("phase2_score present iff phase 1 predicted unhealthy")
        covid = self.final_label in (LABEL_COVID_LOW, LABEL_COVID_HIGH)
        if (self.phase3_score is not None) != covid:
            raise ValueError("phase3_score present iff phase 2 predicted COVID")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def prep_config_digest(config: PrepConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _severity_sign(value: str) -> int:
    norm = str(value).strip().lower()
    if norm == "high":
        return 1
    if norm == "low":
        return -1
    raise ValueError(f"severity must be 'high' or 'low', got {value!r}")


def build_phase_datasets(
    healthy: FeatureSet,
    pneumonia: FeatureSet,
    covid: FeatureSet,
    severity: Mapping[str, str],
) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Assemble the three binary training sets.

    Phase 1: healthy (-1) vs pneumonia+covid (+1), all rows.
    Phase 2: pneumonia (-1) vs covid (+1); healthy rows never appear.
    Phase 3: covid rows with a severity entry, low (-1) vs high (+1);
    covid rows absent from the mapping are simply not phase-3 training data.
    """
    for name, part in (("healthy", healthy), ("pneumonia", pneumonia), ("covid", covid)):
        if part.n == 0:
            raise ClassTooSmall(f"{name} set is empty")

    p1 = LabeledDataset(
        X=np.vstack([healthy.X, pneumonia.X, covid.X]),
        y=np.concatenate(
            [
                -np.ones(healthy.n, dtype=np.int64),
                np.ones(pneumonia.n + covid.n, dtype=np.int64),
            ]
        ),
        ids=healthy.ids + pneumonia.ids + covid.ids,
    )
    p2 = LabeledDataset(
        X=np.vstack([pneumonia.X, covid.X]),
        y=np.concatenate(
            [-np.ones(pneumonia.n, dtype=np.int64), np.ones(covid.n, dtype=np.int64)]
        ),
        ids=pneumonia.ids + covid.ids,
    )
    keep = [i for i, fid in enumerate(covid.ids) if fid in severity]
    if not keep:
        raise ClassTooSmall("no covid rows carry a severity label")
    signs = np.array([_severity_sign(severity[covid.ids[i]]) for i in keep], dtype=np.int64)
    p3 = LabeledDataset(
        X=covid.X[keep],
        y=signs,
        ids=tuple(covid.ids[i] for i in keep),
    )
    return p1, p2, p3


def _train_phase(dataset: LabeledDataset, spec: TrainSpec, phase: int) -> tuple[PhaseModel, dict]:
    if not dataset.has_both_classes():
        raise ClassTooSmall(f"phase {phase} training set lacks one class")
    result = grid_search(
        spec.kind, spec.resolved_grid(), dataset, k=spec.k, metric=spec.metric, seed=spec.seed
    )
    settings = dict(result.best_settings)
    if spec.kind in ("forest", "boost"):
        settings.setdefault("seed", spec.seed)
    model = fit_model(spec.kind, settings, dataset)
    winner = result.table[result.best_index]
    summary = {
        "phase": phase,
        "kind": spec.kind,
        "settings": settings,
        "cv_metric": spec.metric,
        "cv": {
            name: {"mean": winner[f"{name}_mean"], "std": winner[f"{name}_std"]}
            for name in ("roc_auc", "pr_auc", "f1")
        },
        "n_train": dataset.n,
    }
    return PhaseModel(kind=spec.kind, model=model), summary


def cascade_train(
    healthy: FeatureSet,
    pneumonia: FeatureSet,
    covid: FeatureSet,
    severity: Mapping[str, str],
    spec: TrainSpec,
    extractor_spec: ExtractorSpec | None = None,
    extractor_id: str | None = None,
    prep_config: PrepConfig | None = None,
) -> CascadeModel:
    extractor_spec = extractor_spec or ExtractorSpec(kind="baseline")
    prep_config = prep_config or PrepConfig()
    if extractor_id is None:
        extractor_id = load_extractor(extractor_spec).extractor_id
    d1, d2, d3 = build_phase_datasets(healthy, pneumonia, covid, severity)
    m1, s1 = _train_phase(d1, spec, 1)
    m2, s2 = _train_phase(d2, spec, 2)
    m3, s3 = _train_phase(d3, spec, 3)
    return CascadeModel(
        phase1=m1,
        phase2=m2,
        phase3=m3,
        extractor_spec=extractor_spec,
        extractor_id=extractor_id,
        prep_config=prep_config,
        phase_summaries=(s1, s2, s3),
    )


def predict_from_features(model: CascadeModel, features: FeatureVector) -> CascadeResult:
    if features.extractor_id != model.extractor_id:
        raise ExtractorMismatch(
            f"features from {features.extractor_id!r}, model expects {model.extractor_id!r}"
        )
    x = features.values
    s1 = model.phase1.score_one(x)
    if s1 < 0.0:
        return CascadeResult(final_label=LABEL_HEALTHY, phase1_score=s1)
    s2 = model.phase2.score_one(x)
    if s2 < 0.0:
        return CascadeResult(final_label=LABEL_PNEUMONIA, phase1_score=s1, phase2_score=s2)
    s3 = model.phase3.score_one(x)
    label = LABEL_COVID_HIGH if s3 >= 0.0 else LABEL_COVID_LOW
    return CascadeResult(
        final_label=label, phase1_score=s1, phase2_score=s2, phase3_score=s3
    )


def cascade_predict(model: CascadeModel, image_bytes: bytes, extractor=None) -> CascadeResult:
    """Full path from encoded image bytes to a staged verdict."""
    if extractor is None:
        extractor = load_extractor(model.extractor_spec)
    if extractor.extractor_id != model.extractor_id:
        raise ExtractorMismatch(
            f"extractor {extractor.extractor_id!r}, model expects {model.extractor_id!r}"
        )
    img = preprocess(image_bytes, model.prep_config)
    return predict_from_features(model, extractor.extract(img))


CONFUSION_ORDER = (LABEL_COVID_HIGH, LABEL_COVID_LOW, LABEL_PNEUMONIA, LABEL_HEALTHY)


def evaluate_cascade(
    model: CascadeModel,
    healthy: FeatureSet,
    pneumonia: FeatureSet,
    covid: FeatureSet,
    severity: Mapping[str, str],
) -> dict:
    """Score a fitted cascade on labeled feature sets.

    Each phase is measured on its eligible population (phase 1 on all rows,
    phase 2 on pneumonia+covid, phase 3 on severity-labeled covid rows),
    alongside a 4-class confusion matrix of final labels and macro F1.
    """
    d1, d2, d3 = build_phase_datasets(healthy, pneumonia, covid, severity)
    phases = []
    for phase_no, (phase, dataset) in enumerate(
        ((model.phase1, d1), (model.phase2, d2), (model.phase3, d3)), start=1
    ):
        scores = phase.score(dataset.X)
        preds = np.where(scores >= 0.0, 1, -1)
        negative, positive = PHASE_LABELS[phase_no]
        phases.append(
            {
                "phase": phase_no,
                "task": f"{negative} vs {positive}",
                "n": dataset.n,
                "roc_auc": roc_auc(scores, dataset.y),
                "pr_auc": pr_auc(scores, dataset.y),
                "f1": f1(preds, dataset.y),
            }
        )

    truths, preds = [], []
    for part, base_label in ((healthy, LABEL_HEALTHY), (pneumonia, LABEL_PNEUMONIA), (covid, None)):
        for i in range(part.n):
            if base_label is None:
                if part.ids[i] not in severity:
                    continue
                truth = LABEL_COVID_HIGH if _severity_sign(severity[part.ids[i]]) > 0 else LABEL_COVID_LOW
            else:
                truth = base_label
            truths.append(truth)
            result = predict_from_features(
                model, FeatureVector(values=part.X[i], extractor_id=model.extractor_id)
            )
            preds.append(result.final_label)
    matrix = confusion(np.array(preds), np.array(truths), CONFUSION_ORDER)
    per_class_f1 = {
        label: f1(np.array(preds), np.array(truths), positive_class=label)
        for label in CONFUSION_ORDER
    }
    return {
        "phases": phases,
        "confusion": {
            "class_order": list(CONFUSION_ORDER),
            "rows_true_cols_pred": matrix.tolist(),
        },
        "per_class_f1": per_class_f1,
        "macro_f1": float(np.mean(list(per_class_f1.values()))),
        "n_scored": len(truths),
    }
