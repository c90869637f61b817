"""Bagged ensemble of Gini CART trees with per-split feature subsampling."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .base import LabeledDataset, Scaler, _require_both_classes, apply_scaler, fit_scaler
from .tree import ClassificationTree

__all__ = ["ForestParams", "ForestModel", "forest_fit", "forest_proba", "forest_predict"]


@dataclass(frozen=True)
class ForestParams:
    """Forest configuration.

    max_features accepts "sqrt", an int, or None (all features). Setting
    n_trees=1, bootstrap=False, max_features=None reproduces a single CART
    fit exactly.
    """

    n_trees: int = 100
    max_depth: int | None = None
    max_features: int | str | None = "sqrt"
    bootstrap: bool = True
    vote: str = "soft"
    min_samples_split: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.vote not in ("soft", "hard"):
            raise ValueError(f"vote must be 'soft' or 'hard', got {self.vote!r}")
        if isinstance(self.max_features, str) and self.max_features != "sqrt":
            raise ValueError(f"max_features string form must be 'sqrt', got {self.max_features!r}")
        if isinstance(self.max_features, int) and self.max_features < 1:
            raise ValueError("max_features must be >= 1")

    def resolve_max_features(self, n_features: int) -> int | None:
        if self.max_features is None:
            return None
        if self.max_features == "sqrt":
            return max(1, int(np.sqrt(n_features)))
        return min(self.max_features, n_features)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[ClassificationTree, ...]
    params: ForestParams
    scaler: Scaler

    @property
    def dim(self) -> int:
        return self.scaler.mean.shape[0]


def forest_fit(dataset: LabeledDataset, params: ForestParams) -> ForestModel:
    """Fit the ensemble. Tree seeds derive from a spawned seed sequence, so
    the forest is reproducible and trees are mutually independent."""
    _require_both_classes(dataset, "forest_fit")
    scaler = fit_scaler(dataset.X)
    X = apply_scaler(scaler, dataset.X)
    y = dataset.y
    n = X.shape[0]
    max_features = params.resolve_max_features(X.shape[1])

    seeds = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    trees = []
    for seq in seeds:
        rng = np.random.default_rng(seq)
        if params.bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
            if not (np.any(yb > 0) and np.any(yb < 0)):
                # Degenerate resample; fall back to the full sample so every
                # tree sees both classes.
                Xb, yb = X, y
        else:
            Xb, yb = X, y
        tree = ClassificationTree(
            max_depth=params.max_depth,
            min_samples_split=params.min_samples_split,
            max_features=max_features,
        )
        tree.fit(Xb, yb, rng=rng)
        trees.append(tree)
    return ForestModel(trees=tuple(trees), params=params, scaler=scaler)


def forest_proba(model: ForestModel, X: np.ndarray) -> np.ndarray:
    """(n, 2) class probabilities, columns ordered [-1, +1].

    Soft voting averages leaf probabilities; hard voting averages one-hot
    tree verdicts (per-tree ties go to the positive class).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xs = apply_scaler(model.scaler, X)
    acc = np.zeros((Xs.shape[0], 2))
    for tree in model.trees:
        p = tree.predict_proba(Xs)
        if model.params.vote == "hard":
            hard = (p[:, 1] >= 0.5).astype(np.float64)
            p = np.column_stack([1.0 - hard, hard])
        acc += p
    return acc / len(model.trees)


def forest_predict(model: ForestModel, X: np.ndarray) -> np.ndarray:
    proba = forest_proba(model, X)
    return np.where(proba[:, 1] >= 0.5, 1, -1)
