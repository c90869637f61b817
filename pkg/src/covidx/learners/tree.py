"""CART trees: Gini classification trees and squared-error regression trees.

Split search is exact: every midpoint between consecutive distinct values
of a candidate feature is scored via prefix sums. Ties are broken toward
the lowest feature index, then the lowest threshold, so fits are
deterministic for a fixed feature subset order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["ClassificationTree", "RegressionTree"]

_MIN_GAIN = 1e-12


@dataclass
class _Node:
    feature: int = -1            # -1 marks a leaf
    threshold: float = 0.0
    left: Optional["_Node"] = None
    right: Optional["_Node"] = None
    value: np.ndarray | float = 0.0


def _choose_features(n_features: int, max_features: int | None, rng) -> np.ndarray:
    """Per-split feature subset. Using all features consumes no randomness,
    so a full-feature tree is independent of the rng stream."""
    if max_features is None or max_features >= n_features:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=max_features, replace=False))


class _TreeBase:
    def __init__(self, max_depth=None, min_samples_split=2, max_features=None):
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.max_features = max_features
        self.root: _Node | None = None

    def _leaf_ids(self, X: np.ndarray) -> np.ndarray:
        """Index of the leaf (in preorder numbering) each row lands in."""
        nodes, _ = self._flatten()
        out = np.zeros(X.shape[0], dtype=np.intp)
        stack = [(0, np.arange(X.shape[0]))]
        while stack:
            ni, idx = stack.pop()
            feat, thr, left, right = nodes[ni]
            if feat < 0:
                out[idx] = ni
                continue
            mask = X[idx, feat] <= thr
            stack.append((left, idx[mask]))
            stack.append((right, idx[~mask]))
        return out

    def _flatten(self):
        """Preorder (feature, threshold, left, right) int/float arrays plus
        the list of leaf values; cached per fitted tree."""
        if getattr(self, "_flat", None) is None:
            nodes = []
            values = []

            def walk(node):
                my = len(nodes)
                nodes.append(None)
                values.append(node.value)
                if node.feature < 0:
                    nodes[my] = (-1, 0.0, -1, -1)
                else:
                    li = walk(node.left)
                    ri = walk(node.right)
                    nodes[my] = (node.feature, node.threshold, li, ri)
                return my

            walk(self.root)
            self._flat = (nodes, values)
        return self._flat


class ClassificationTree(_TreeBase):
    """Binary CART minimizing Gini impurity; leaves hold [p_neg, p_pos]."""

    def fit(self, X: np.ndarray, y: np.ndarray, rng=None) -> "ClassificationTree":
        X = np.asarray(X, dtype=np.float64)
        pos = (np.asarray(y) > 0).astype(np.float64)
        rng = rng or np.random.default_rng(0)
        self._flat = None
        self.root = self._grow(X, pos, 0, rng)
        return self

    def _grow(self, X, pos, depth, rng):
        n = X.shape[0]
        n_pos = pos.sum()
        p = n_pos / n
        leaf_value = np.array([1.0 - p, p])
        if (
            (self.max_depth is not None and depth >= self.max_depth)
            or n < self.min_samples_split
            or n_pos == 0
            or n_pos == n
        ):
            return _Node(value=leaf_value)
        parent_gini = 1.0 - p * p - (1.0 - p) * (1.0 - p)
        split = self._best_split(X, pos, rng)
        if split is None or parent_gini - split[2] <= _MIN_GAIN:
            return _Node(value=leaf_value)
        feat, thr, _ = split
        mask = X[:, feat] <= thr
        return _Node(
            feature=feat,
            threshold=thr,
            left=self._grow(X[mask], pos[mask], depth + 1, rng),
            right=self._grow(X[~mask], pos[~mask], depth + 1, rng),
            value=leaf_value,
        )

    def _best_split(self, X, pos, rng):
        n = X.shape[0]
        best = None  # (feature, threshold, weighted_gini)
        for feat in _choose_features(X.shape[1], self.max_features, rng):
            v = X[:, feat]
            order = np.argsort(v, kind="stable")
            vs, ps = v[order], pos[order]
            distinct = vs[1:] > vs[:-1]
            if not distinct.any():
                continue
            t = np.arange(1, n)                     # left-side sizes
            pos_l = np.cumsum(ps)[:-1]
            pos_r = ps.sum() - pos_l
            n_l, n_r = t, n - t
            gini_l = 1.0 - (pos_l / n_l) ** 2 - ((n_l - pos_l) / n_l) ** 2
            gini_r = 1.0 - (pos_r / n_r) ** 2 - ((n_r - pos_r) / n_r) ** 2
            weighted = (n_l * gini_l + n_r * gini_r) / n
            weighted[~distinct] = np.inf
            k = int(np.argmin(weighted))
            if best is None or weighted[k] < best[2] - _MIN_GAIN:
                best = (int(feat), float(0.5 * (vs[k] + vs[k + 1])), float(weighted[k]))
        return best

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        nodes, values = self._flatten()
        ids = self._leaf_ids(X)
        table = np.zeros((len(values), 2))
        for i, val in enumerate(values):
            table[i] = val
        return table[ids]

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)[:, 1]
        return np.where(proba >= 0.5, 1, -1)

    def to_arrays(self) -> dict:
        nodes, values = self._flatten()
        return {
            "feature": np.array([n[0] for n in nodes], dtype=np.int64),
            "threshold": np.array([n[1] for n in nodes], dtype=np.float64),
            "left": np.array([n[2] for n in nodes], dtype=np.int64),
            "right": np.array([n[3] for n in nodes], dtype=np.int64),
            "value": np.stack([np.asarray(v, dtype=np.float64) for v in values]),
        }

    @classmethod
    def from_arrays(cls, arrays: dict) -> "ClassificationTree":
        tree = cls()
        tree.root = _rebuild(arrays, 0, lambda v: v)
        tree._flat = None
        return tree


class RegressionTree(_TreeBase):
    """Squared-error CART over gradient targets with Newton leaf values.

    fit() takes per-row gradients and hessians: the structure minimizes the
    gradients' within-node squared error, and each leaf stores
    sum(grad) / (sum(hess) + eps).
    """

    def fit(self, X: np.ndarray, grad: np.ndarray, hess: np.ndarray, rng=None) -> "RegressionTree":
        X = np.asarray(X, dtype=np.float64)
        grad = np.asarray(grad, dtype=np.float64)
        hess = np.asarray(hess, dtype=np.float64)
        rng = rng or np.random.default_rng(0)
        self._flat = None
        self.root = self._grow(X, grad, hess, 0, rng)
        return self

    @staticmethod
    def _newton(grad_sum, hess_sum):
        return float(grad_sum / (hess_sum + 1e-16))

    def _grow(self, X, grad, hess, depth, rng):
        n = X.shape[0]
        leaf = _Node(value=self._newton(grad.sum(), hess.sum()))
        if (self.max_depth is not None and depth >= self.max_depth) or n < self.min_samples_split:
            return leaf
        split = self._best_split(X, grad, rng)
        if split is None:
            return leaf
        feat, thr = split
        mask = X[:, feat] <= thr
        return _Node(
            feature=feat,
            threshold=thr,
            left=self._grow(X[mask], grad[mask], hess[mask], depth + 1, rng),
            right=self._grow(X[~mask], grad[~mask], hess[~mask], depth + 1, rng),
            value=leaf.value,
        )

    def _best_split(self, X, grad, rng):
        n = X.shape[0]
        total = grad.sum()
        base_score = total * total / n
        best = None  # (score_gain, feature, threshold)
        for feat in _choose_features(X.shape[1], self.max_features, rng):
            v = X[:, feat]
            order = np.argsort(v, kind="stable")
            vs, gs = v[order], grad[order]
            distinct = vs[1:] > vs[:-1]
            if not distinct.any():
                continue
            t = np.arange(1, n)
            g_l = np.cumsum(gs)[:-1]
            g_r = total - g_l
            score = g_l * g_l / t + g_r * g_r / (n - t)  # higher = lower SSE
            score[~distinct] = -np.inf
            k = int(np.argmax(score))
            if score[k] - base_score <= _MIN_GAIN:
                continue
            if best is None or score[k] > best[0] + _MIN_GAIN:
                best = (float(score[k]), int(feat), float(0.5 * (vs[k] + vs[k + 1])))
        return (best[1], best[2]) if best else None

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        nodes, values = self._flatten()
        ids = self._leaf_ids(X)
        table = np.array([float(v) for v in values])
        return table[ids]

    def scale_leaves(self, factor: float) -> None:
        """Bake a learning-rate factor into every node value."""

        def walk(node):
            node.value = float(node.value) * factor
            if node.feature >= 0:
                walk(node.left)
                walk(node.right)

        walk(self.root)
        self._flat = None

    def to_arrays(self) -> dict:
        nodes, values = self._flatten()
        return {
            "feature": np.array([n[0] for n in nodes], dtype=np.int64),
            "threshold": np.array([n[1] for n in nodes], dtype=np.float64),
            "left": np.array([n[2] for n in nodes], dtype=np.int64),
            "right": np.array([n[3] for n in nodes], dtype=np.int64),
            "value": np.array([float(v) for v in values], dtype=np.float64),
        }

    @classmethod
    def from_arrays(cls, arrays: dict) -> "RegressionTree":
        tree = cls()
        tree.root = _rebuild(arrays, 0, float)
        tree._flat = None
        return tree


def _rebuild(arrays: dict, idx: int, value_of) -> _Node:
    feat = int(arrays["feature"][idx])
    node = _Node(feature=feat, threshold=float(arrays["threshold"][idx]), value=value_of(arrays["value"][idx]))
    if feat >= 0:
        node.left = _rebuild(arrays, int(arrays["left"][idx]), value_of)
        node.right = _rebuild(arrays, int(arrays["right"][idx]), value_of)
    return node
