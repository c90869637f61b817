"""Soft-margin binary SVM trained with sequential minimal optimization.

The dual problem (box constraint 0 <= alpha_i <= C_i, sum alpha_i y_i = 0)
is solved by deterministic pairwise updates: the first index comes from a
KKT-violation scan, the partner from the largest |E_i - E_j| error gap,
with an exhaustive fallback. No randomness is used, so fitting the same
data twice gives identical models.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .base import DimensionError, LabeledDataset, Scaler, _require_both_classes, apply_scaler, fit_scaler

__all__ = [
    "ConvergenceWarning",
    "SvmParams",
    "SvmModel",
    "svm_fit",
    "svm_decision",
    "svm_predict",
]

_STEP_EPS = 1e-10
_SUPPORT_EPS = 1e-12


class ConvergenceWarning(UserWarning):
    """Optimizer stopped before satisfying all KKT conditions."""


@dataclass(frozen=True)
class SvmParams:
    """Hyperparameters. The margin/violation tradeoff is lambda = 1/C."""

    C: float = 1.0
    kernel: str = "linear"
    gamma: Optional[float] = None
    tol: float = 1e-3
    max_passes: int = 200
    pos_weight: float = 1.0  # multiplies C on positive examples; 1 = off

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.kernel not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "rbf" and (self.gamma is None or self.gamma <= 0):
            raise ValueError("rbf kernel requires gamma > 0")
        if self.tol <= 0 or self.max_passes < 1 or self.pos_weight <= 0:
            raise ValueError("tol, max_passes and pos_weight must be positive")

    def to_dict(self) -> dict:
        return {
            "C": self.C,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "tol": self.tol,
            "max_passes": self.max_passes,
            "pos_weight": self.pos_weight,
        }


@dataclass(frozen=True)
class SvmModel:
    alphas: np.ndarray          # dual coefficients of the support set, in (0, C_i]
    support_vectors: np.ndarray  # standardized feature rows with alpha > 0
    support_labels: np.ndarray
    bias: float
    params: SvmParams
    scaler: Scaler
    converged: bool
    n_sweeps: int

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1] if self.support_vectors.size else self.scaler.mean.shape[0]


def _kernel_matrix(params: SvmParams, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if params.kernel == "linear":
        return A @ B.T
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-params.gamma * np.maximum(d2, 0.0))


def _dual_objective(K, y, alpha):
    u = alpha * y
    return alpha.sum() - 0.5 * (u @ K @ u)


def _resolve_bias(K, y, alpha, C_vec, fallback):
    """Deterministic bias for a fixed set of duals.

    The unbiased decision values u_i are unique at the dual optimum even
    when the bias itself is not. Free support vectors pin the bias exactly;
    with every dual at a bound the complementary-slackness inequalities only
    bracket it, and we take the midpoint of that bracket so the result does
    not depend on the order the solver visited pairs in.
    """
    u = (alpha * y) @ K
    free = (alpha > _SUPPORT_EPS) & (alpha < C_vec - _SUPPORT_EPS)
    if np.any(free):
        return float(np.mean(y[free] - u[free]))
    lowers = []
    uppers = []
    for i in range(alpha.shape[0]):
        at_zero = alpha[i] <= _SUPPORT_EPS
        if y[i] > 0:
            (lowers if at_zero else uppers).append(1.0 - u[i])
        else:
            (uppers if at_zero else lowers).append(-1.0 - u[i])
    if lowers and uppers:
        return 0.5 * (max(lowers) + min(uppers))
    if lowers:
        return max(lowers)
    if uppers:
        return min(uppers)
    return float(fallback)


def svm_fit(D: LabeledDataset, params: SvmParams) -> SvmModel:
    """Fit by SMO on standardized features.

    Returns a model whose duals are box-feasible and whose KKT conditions
    hold within params.tol when ``converged`` is True. Exhausting
    params.max_passes sweeps emits a ConvergenceWarning instead of failing.
    """
    _require_both_classes(D, "svm_fit")
    scaler = fit_scaler(D.X)
    X = apply_scaler(scaler, D.X)
    y = D.y.astype(np.float64)
    n = X.shape[0]

    C_vec = np.where(y > 0, params.C * params.pos_weight, params.C)
    K = _kernel_matrix(params, X, X)
    alpha = np.zeros(n)
    b = 0.0
    tol = params.tol

    def take_step(i, j, E):
        nonlocal b
        if i == j:
            return False
        ai, aj = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        s = yi * yj
        if yi != yj:
            L = max(0.0, aj - ai)
            H = min(C_vec[j], C_vec[i] + aj - ai)
        else:
            L = max(0.0, ai + aj - C_vec[i])
            H = min(C_vec[j], ai + aj)
        if H - L < _STEP_EPS:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta < 0.0:
            aj_new = aj - yj * (E[i] - E[j]) / eta
            aj_new = min(max(aj_new, L), H)
        else:
            # Flat or degenerate direction (duplicate rows): compare the
            # dual objective at both ends of the feasible segment.
            best = None
            for cand in (L, H):
                trial = alpha.copy()
                trial[j] = cand
                trial[i] = ai + s * (aj - cand)
                val = _dual_objective(K, y, trial)
                if best is None or val > best[0] + 1e-12:
                    best = (val, cand)
            aj_new = best[1]
        if abs(aj_new - aj) < _STEP_EPS:
            return False
        ai_new = ai + s * (aj - aj_new)
        # Snap tiny constraint drift back onto the box.
        if ai_new < 0.0:
            aj_new += s * ai_new
            ai_new = 0.0
        elif ai_new > C_vec[i]:
            aj_new += s * (ai_new - C_vec[i])
            ai_new = C_vec[i]
        d_ai, d_aj = ai_new - ai, aj_new - aj
        b1 = b - E[i] - yi * d_ai * K[i, i] - yj * d_aj * K[i, j]
        b2 = b - E[j] - yi * d_ai * K[i, j] - yj * d_aj * K[j, j]
        if 0.0 < ai_new < C_vec[i]:
            b_new = b1
        elif 0.0 < aj_new < C_vec[j]:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        alpha[i], alpha[j] = ai_new, aj_new
        E += yi * d_ai * K[i] + yj * d_aj * K[j] + (b_new - b)
        b = b_new
        return True

    converged = False
    sweeps = 0
    for sweeps in range(1, params.max_passes + 1):
        E = (alpha * y) @ K + b - y  # fresh error cache each sweep
        changed = 0
        for i in range(n):
            r = y[i] * E[i]
            if not (
                (r < -tol and alpha[i] < C_vec[i] - _SUPPORT_EPS)
                or (r > tol and alpha[i] > _SUPPORT_EPS)
            ):
                continue
            gaps = np.abs(E[i] - E)
            gaps[i] = -1.0
            if take_step(i, int(np.argmax(gaps)), E):
                changed += 1
                continue
            for j in range(n):
                if j != i and take_step(i, j, E):
                    changed += 1
                    break
        if changed == 0:
            r_all = y * E
            converged = bool(
                np.all(
                    ((alpha <= _SUPPORT_EPS) | (r_all <= tol))
                    & ((alpha >= C_vec - _SUPPORT_EPS) | (r_all >= -tol))
                )
            )
            break
    if not converged:
        warnings.warn(
            f"SMO stopped after {sweeps} sweeps without satisfying KKT tolerance",
            ConvergenceWarning,
            stacklevel=2,
        )

    b = _resolve_bias(K, y, alpha, C_vec, b)
    keep = alpha > _SUPPORT_EPS
    return SvmModel(
        alphas=alpha[keep].copy(),
        support_vectors=X[keep].copy(),
        support_labels=D.y[keep].copy(),
        bias=float(b),
        params=params,
        scaler=scaler,
        converged=converged,
        n_sweeps=sweeps,
    )


def svm_decision(m: SvmModel, x: np.ndarray) -> float | np.ndarray:
    """Kernel decision value sum_i alpha_i y_i K(sv_i, x) + b.

    Accepts a single length-d vector (returns a float) or an (n, d) batch.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    Xq = apply_scaler(m.scaler, x)  # raises DimensionError on length mismatch
    if single:
        Xq = Xq[None, :]
    if m.support_vectors.size:
        Kq = _kernel_matrix(m.params, Xq, m.support_vectors)
        scores = Kq @ (m.alphas * m.support_labels) + m.bias
    else:
        scores = np.full(Xq.shape[0], m.bias)
    return float(scores[0]) if single else scores


def svm_predict(m: SvmModel, x: np.ndarray) -> int | np.ndarray:
    """Sign of the decision value; an exact 0 maps to +1."""
    score = svm_decision(m, x)
    if np.isscalar(score):
        return 1 if score >= 0.0 else -1
    return np.where(np.asarray(score) >= 0.0, 1, -1)
