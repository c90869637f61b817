"""Shared learner types: labeled datasets and feature standardization."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "DimensionError",
    "LabeledDataset",
    "Scaler",
    "fit_scaler",
    "apply_scaler",
]


class DimensionError(ValueError):
    """Feature vector length does not match what a model was trained on."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix X (N x d), labels y in {+1, -1}, per-row provenance ids."""

    X: np.ndarray
    y: np.ndarray
    ids: tuple = ()

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64, order="C")
        y = np.array(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValueError("y length must match number of rows in X")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be +1 or -1")
        source = self.ids if (self.ids or X.shape[0] == 0) else range(X.shape[0])
        ids = tuple(str(i) for i in source)
        if len(ids) != X.shape[0]:
            raise ValueError("ids length must match number of rows in X")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.intp)
        return LabeledDataset(self.X[idx], self.y[idx], tuple(self.ids[i] for i in idx))

    def has_both_classes(self) -> bool:
        return bool(np.any(self.y == 1) and np.any(self.y == -1))


def _require_both_classes(D: LabeledDataset, what: str) -> None:
    if not D.has_both_classes():
        raise ValueError(f"{what} requires examples of both classes")


@dataclass(frozen=True)
class Scaler:
    """Per-column mean/std standardizer. Zero stds are replaced by 1 at fit
    time so constant columns map to exactly 0."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape or mean.ndim != 1:
            raise ValueError("mean and std must be 1-D and the same length")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(std))):
            raise ValueError("scaler statistics must be finite")
        if np.any(std <= 0):
            raise ValueError("std entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


def fit_scaler(X: np.ndarray) -> Scaler:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a non-empty 2-D matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return Scaler(mean, std)


def apply_scaler(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != scaler.mean.shape[0]:
        raise DimensionError(
            f"expected {scaler.mean.shape[0]} features, got {X.shape[1]}"
        )
    out = (X - scaler.mean) / scaler.std
    return out[0] if single else out
