"""Hyperparameter grid search over the three classifier families.

A "kind" string ("svm" / "forest" / "boost") plus a plain parameter dict
fully names a configuration, which keeps grids serializable. Scores use the
shared margin convention: >= 0 means the positive class.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ..metrics_eval import cross_validate
from .base import LabeledDataset
from .boost import BoostModel, BoostParams, boost_fit, boost_raw_score
from .forest import ForestModel, ForestParams, forest_fit, forest_proba
from .svm import SvmModel, SvmParams, svm_decision, svm_fit

__all__ = [
    "KINDS",
    "DEFAULT_GRIDS",
    "GridSearchResult",
    "make_params",
    "fit_model",
    "model_scores",
    "learner_factory",
    "grid_search",
]

KINDS = ("svm", "forest", "boost")

_PARAM_TYPES = {"svm": SvmParams, "forest": ForestParams, "boost": BoostParams}

DEFAULT_GRIDS: dict[str, tuple[dict, ...]] = {
    "svm": tuple(
        [{"kernel": "linear", "C": c} for c in (0.01, 0.1, 1.0, 10.0, 100.0)]
        + [
            {"kernel": "rbf", "C": c, "gamma": g}
            for c in (0.01, 0.1, 1.0, 10.0, 100.0)
            for g in (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
        ]
    ),
    "forest": tuple(
        {"n_trees": t, "max_depth": d}
        for t in (100, 300)
        for d in (3, 6, None)
    ),
    "boost": tuple(
        {"n_rounds": t, "max_depth": d, "learning_rate": lr, "subsample": s}
        for t in (100, 300)
        for d in (3, 6)
        for lr in (0.05, 0.1, 0.3)
        for s in (0.8, 1.0)
    ),
}


def make_params(kind: str, settings: Mapping):
    if kind not in _PARAM_TYPES:
        raise ValueError(f"unknown learner kind {kind!r}, expected one of {KINDS}")
    return _PARAM_TYPES[kind](**dict(settings))


def fit_model(kind: str, settings: Mapping, dataset: LabeledDataset):
    params = make_params(kind, settings)
    if kind == "svm":
        return svm_fit(dataset, params)
    if kind == "forest":
        return forest_fit(dataset, params)
    return boost_fit(dataset, params)


def model_scores(kind: str, model, X: np.ndarray) -> np.ndarray:
    """Margin scores for any fitted model; >= 0 predicts +1 for all kinds."""
    if kind == "svm":
        out = svm_decision(model, X)
        return np.atleast_1d(np.asarray(out, dtype=np.float64))
    if kind == "forest":
        return forest_proba(model, X)[:, 1] - 0.5
    if kind == "boost":
        return boost_raw_score(model, X)
    raise ValueError(f"unknown learner kind {kind!r}")


def kind_of_model(model) -> str:
    if isinstance(model, SvmModel):
        return "svm"
    if isinstance(model, ForestModel):
        return "forest"
    if isinstance(model, BoostModel):
        return "boost"
    raise TypeError(f"not a fitted classifier: {type(model).__name__}")


def learner_factory(kind: str, settings: Mapping) -> Callable[[LabeledDataset], Callable[[np.ndarray], np.ndarray]]:
    """Adapter for cross_validate: fits on the training folds it is handed
    and closes over the fitted model for scoring."""
    make_params(kind, settings)  # validate eagerly

    def fit(train: LabeledDataset) -> Callable[[np.ndarray], np.ndarray]:
        model = fit_model(kind, settings, train)
        return lambda X: model_scores(kind, model, X)

    return fit


@dataclass(frozen=True)
class GridSearchResult:
    kind: str
    best_settings: dict
    best_index: int
    best_mean: float
    metric: str
    table: tuple[dict, ...]
    """One row per grid point: settings plus mean/std of each CV metric."""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "metric": self.metric,
            "best_index": self.best_index,
            "best_mean": self.best_mean,
            "best_settings": dict(self.best_settings),
            "table": [dict(row) for row in self.table],
        }


def grid_search(
    kind: str,
    grid: Sequence[Mapping],
    dataset: LabeledDataset,
    k: int = 10,
    metric: str = "f1",
    seed: int = 0,
) -> GridSearchResult:
    """Evaluate every grid point by stratified k-fold CV and return the
    argmax of the mean metric. Ties keep the earliest grid entry. The same
    seed (hence the same folds) is used for every point, so comparisons are
    paired."""
    if not grid:
        raise ValueError("grid must be non-empty")
    if metric not in ("roc_auc", "pr_auc", "f1"):
        raise ValueError(f"unknown metric {metric!r}")
    rows = []
    best_index, best_mean = 0, -np.inf
    for i, settings in enumerate(grid):
        report = cross_validate(learner_factory(kind, settings), dataset, k, seed)
        row = {"settings": dict(settings)}
        for name in ("roc_auc", "pr_auc", "f1"):
            row[f"{name}_mean"] = report.mean(name)
            row[f"{name}_std"] = report.std(name)
        rows.append(row)
        if row[f"{metric}_mean"] > best_mean:
            best_index, best_mean = i, row[f"{metric}_mean"]
    return GridSearchResult(
        kind=kind,
        best_settings=dict(grid[best_index]),
        best_index=best_index,
        best_mean=float(best_mean),
        metric=metric,
        table=tuple(rows),
    )
