"""Stratified splitting, k-fold cross-validation, and ranking metrics.

Scores follow a margin convention throughout: a score >= 0 predicts the
positive class. ROC-AUC uses the Mann-Whitney statistic with half credit
for ties; PR-AUC is step-integrated average precision with no linear
interpolation between curve points.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

__all__ = [
    "ClassTooSmall",
    "SingleClassError",
    "NoPositivesError",
    "FoldAssignment",
    "EvalReport",
    "stratified_split",
    "kfold",
    "roc_auc",
    "pr_auc",
    "f1",
    "confusion",
    "cross_validate",
]


class ClassTooSmall(ValueError):
    """A class has too few members for the requested split."""


class SingleClassError(ValueError):
    """Ranking metric asked to score a single-class label set."""


class NoPositivesError(ValueError):
    """Precision-recall metric asked to score labels with no positives."""


class SplittableDataset(Protocol):
    """What cross_validate needs from a dataset: rows, labels, subsetting."""

    X: np.ndarray
    y: np.ndarray

    def subset(self, indices) -> "SplittableDataset": ...


@dataclass(frozen=True)
class FoldAssignment:
    """Maps each row index to a fold in [0, k)."""

    fold_of: np.ndarray
    k: int

    def __post_init__(self):
        fold_of = np.ascontiguousarray(np.asarray(self.fold_of, dtype=np.int64))
        fold_of.setflags(write=False)
        object.__setattr__(self, "fold_of", fold_of)
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if fold_of.size and (fold_of.min() < 0 or fold_of.max() >= self.k):
            raise ValueError("fold ids must lie in [0, k)")

    @property
    def n(self) -> int:
        return self.fold_of.shape[0]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def _class_indices(labels) -> list[tuple[object, np.ndarray]]:
    labels = np.asarray(labels)
    values, inverse = np.unique(labels, return_inverse=True)
    return [(values[c], np.flatnonzero(inverse == c)) for c in range(values.shape[0])]


def stratified_split(labels, test_fraction: float, seed: int = 0):
    """Disjoint, covering (train_idx, test_idx) preserving class proportions
    within one sample. Every class lands at least one row on each side."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    train_parts, test_parts = [], []
    for value, idx in _class_indices(labels):
        if idx.shape[0] < 2:
            raise ClassTooSmall(f"class {value!r} has {idx.shape[0]} member(s), need at least 2")
        n_test = int(round(idx.shape[0] * test_fraction))
        n_test = min(max(n_test, 1), idx.shape[0] - 1)
        shuffled = rng.permutation(idx)
        test_parts.append(shuffled[:n_test])
        train_parts.append(shuffled[n_test:])
    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts))
    return train_idx, test_idx


def kfold(labels, k: int, seed: int = 0) -> FoldAssignment:
    """Stratified fold assignment: per-class counts across folds differ by
    at most one. Deterministic for a fixed seed."""
    if k < 2:
        raise ValueError("k must be >= 2")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    fold_of = np.full(labels.shape[0], -1, dtype=np.int64)
    for value, idx in _class_indices(labels):
        if idx.shape[0] < k:
            raise ClassTooSmall(f"class {value!r} has {idx.shape[0]} member(s), need at least k={k}")
        shuffled = rng.permutation(idx)
        base, extra = divmod(idx.shape[0], k)
        start = 0
        for f in range(k):
            size = base + (1 if f < extra else 0)
            fold_of[shuffled[start : start + size]] = f
            start += size
    return FoldAssignment(fold_of=fold_of, k=k)


def _split_scores(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape[0] != labels.shape[0]:
        raise ValueError("scores and labels must have equal length")
    pos = labels > 0
    return scores, pos


def roc_auc(scores, labels) -> float:
    """P(score_pos > score_neg) + half the tie probability, computed from
    average ranks (Mann-Whitney U)."""
    scores, pos = _split_scores(scores, labels)
    n_pos = int(pos.sum())
    n_neg = scores.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("roc_auc needs both classes present")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < sorted_scores.shape[0]:
        j = i
        while j + 1 < sorted_scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average 1-based rank
        i = j + 1
    rank_sum = ranks[pos].sum()
    u = rank_sum - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def pr_auc(scores, labels) -> float:
    """Average precision: sum of (recall step) x (precision) over descending
    score thresholds, with tied scores collapsed into one threshold."""
    scores, pos = _split_scores(scores, labels)
    n_pos = int(pos.sum())
    if n_pos == 0:
        raise NoPositivesError("pr_auc needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = pos[order].astype(np.float64)
    # Last index of each tie group marks one curve point.
    boundary = np.flatnonzero(np.append(sorted_scores[1:] != sorted_scores[:-1], True))
    tp = np.cumsum(sorted_pos)[boundary]
    taken = boundary + 1.0
    precision = tp / taken
    recall = tp / n_pos
    delta = np.diff(np.concatenate([[0.0], recall]))
    return float(np.sum(delta * precision))


def f1(preds, labels, positive_class=1) -> float:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape[0] != labels.shape[0]:
        raise ValueError("preds and labels must have equal length")
    pred_pos = preds == positive_class
    true_pos = labels == positive_class
    tp = int(np.sum(pred_pos & true_pos))
    fp = int(np.sum(pred_pos & ~true_pos))
    fn = int(np.sum(~pred_pos & true_pos))
    if tp == 0 and fp == 0 and fn == 0:
        return 0.0
    # Single-fraction form: one rounding from integer counts, so exact
    # whenever the true value has a short binary/decimal expansion.
    return 2.0 * tp / (2.0 * tp + fp + fn)


def confusion(preds, labels, class_list: Sequence) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class, both in
    class_list order."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape[0] != labels.shape[0]:
        raise ValueError("preds and labels must have equal length")
    index = {c: i for i, c in enumerate(class_list)}
    matrix = np.zeros((len(class_list), len(class_list)), dtype=np.int64)
    for p, t in zip(preds.tolist(), labels.tolist()):
        if t not in index:
            raise ValueError(f"label {t!r} not in class_list")
        if p not in index:
            raise ValueError(f"prediction {p!r} not in class_list")
        matrix[index[t], index[p]] += 1
    return matrix


@dataclass(frozen=True)
class EvalReport:
    """Per-fold metric values with mean and population std, plus summed
    binary confusion counts (rows true, columns predicted, order [-1, +1])."""

    k: int
    per_fold: dict[str, tuple[float, ...]]
    confusion_total: np.ndarray

    def mean(self, metric: str) -> float:
        return float(np.mean(self.per_fold[metric]))

    def std(self, metric: str) -> float:
        return float(np.std(self.per_fold[metric]))  # population std over folds

    def summary(self) -> dict[str, tuple[float, float]]:
        return {m: (self.mean(m), self.std(m)) for m in self.per_fold}

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "metrics": {
                m: {"mean": self.mean(m), "std": self.std(m), "per_fold": list(v)}
                for m, v in sorted(self.per_fold.items())
            },
            "confusion": {
                "class_order": [-1, 1],
                "rows_true_cols_pred": self.confusion_total.tolist(),
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


LearnerFactory = Callable[[SplittableDataset], Callable[[np.ndarray], np.ndarray]]


def cross_validate(learner: LearnerFactory, dataset: SplittableDataset, k: int, seed: int = 0) -> EvalReport:
    """Stratified k-fold evaluation. The learner factory receives only the
    training-fold rows (so any scaler or model fitting is leakage-free by
    construction) and returns a score function over feature rows."""
    assignment = kfold(dataset.y, k, seed)
    per_fold: dict[str, list[float]] = {"roc_auc": [], "pr_auc": [], "f1": []}
    conf_total = np.zeros((2, 2), dtype=np.int64)
    for fold in range(k):
        train = dataset.subset(assignment.train_indices(fold))
        test = dataset.subset(assignment.test_indices(fold))
        score_fn = learner(train)
        scores = np.asarray(score_fn(test.X), dtype=np.float64)
        preds = np.where(scores >= 0.0, 1, -1)
        per_fold["roc_auc"].append(roc_auc(scores, test.y))
        per_fold["pr_auc"].append(pr_auc(scores, test.y))
        per_fold["f1"].append(f1(preds, test.y))
        conf_total += confusion(preds, test.y, (-1, 1))
    return EvalReport(
        k=k,
        per_fold={m: tuple(v) for m, v in per_fold.items()},
        confusion_total=conf_total,
    )
