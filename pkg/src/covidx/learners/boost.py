"""Gradient-boosted regression trees for binary logistic loss.

Each round fits a squared-error tree to the negative gradients of the
logistic loss on a row subsample, then assigns leaves a Newton step
sum(g)/(sum(h)+eps) scaled by the learning rate. Scores accumulate from a
log-odds prior, and probabilities are the sigmoid of the summed scores.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .base import LabeledDataset, Scaler, _require_both_classes, apply_scaler, fit_scaler
from .tree import RegressionTree

__all__ = ["BoostParams", "BoostModel", "boost_fit", "boost_proba", "boost_predict"]


@dataclass(frozen=True)
class BoostParams:
    n_rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    subsample: float = 1.0
    min_samples_split: int = 2
    pos_weight: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ValueError("n_rounds must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must be in (0, 1]")
        if self.pos_weight <= 0:
            raise ValueError("pos_weight must be > 0")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class BoostModel:
    trees: tuple[RegressionTree, ...]
    base_score: float
    params: BoostParams
    scaler: Scaler
    train_losses: tuple[float, ...]
    """Mean training log-loss after each round; index 0 is the prior-only loss."""

    @property
    def dim(self) -> int:
        return self.scaler.mean.shape[0]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _log_loss(y01: np.ndarray, p: np.ndarray, w: np.ndarray) -> float:
    p = np.clip(p, 1e-15, 1.0 - 1e-15)
    per_row = -(y01 * np.log(p) + (1.0 - y01) * np.log(1.0 - p))
    return float(np.sum(w * per_row) / np.sum(w))


def boost_fit(dataset: LabeledDataset, params: BoostParams) -> BoostModel:
    _require_both_classes(dataset, "boost_fit")
    scaler = fit_scaler(dataset.X)
    X = apply_scaler(scaler, dataset.X)
    y01 = (dataset.y > 0).astype(np.float64)
    n = X.shape[0]
    n_pos = y01.sum()
    base_score = float(np.log(n_pos / (n - n_pos)))
    weights = np.where(y01 > 0, params.pos_weight, 1.0)

    rng = np.random.default_rng(params.seed)
    scores = np.full(n, base_score)
    losses = [_log_loss(y01, _sigmoid(scores), weights)]
    trees: list[RegressionTree] = []
    for _ in range(params.n_rounds):
        p = _sigmoid(scores)
        grad = weights * (y01 - p)
        hess = weights * p * (1.0 - p)
        if params.subsample < 1.0:
            k = max(1, int(round(params.subsample * n)))
            rows = rng.permutation(n)[:k]
        else:
            rows = slice(None)
        tree = RegressionTree(max_depth=params.max_depth, min_samples_split=params.min_samples_split)
        tree.fit(X[rows], grad[rows], hess[rows])
        tree.scale_leaves(params.learning_rate)
        scores += tree.predict(X)
        losses.append(_log_loss(y01, _sigmoid(scores), weights))
        trees.append(tree)
    return BoostModel(
        trees=tuple(trees),
        base_score=base_score,
        params=params,
        scaler=scaler,
        train_losses=tuple(losses),
    )


def boost_raw_score(model: BoostModel, X: np.ndarray) -> np.ndarray:
    """Summed log-odds score before the sigmoid."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Xs = apply_scaler(model.scaler, X)
    scores = np.full(Xs.shape[0], model.base_score)
    for tree in model.trees:
        scores += tree.predict(Xs)
    return scores


def boost_proba(model: BoostModel, X: np.ndarray) -> np.ndarray:
    """Probability of the positive class for each row."""
    return _sigmoid(boost_raw_score(model, X))


def boost_predict(model: BoostModel, X: np.ndarray) -> np.ndarray:
    return np.where(boost_proba(model, X) >= 0.5, 1, -1)
