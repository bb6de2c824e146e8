"""Loss functions for l2-regularized empirical risk minimization.

The objective is

    f(w) = (1/n) * sum_i loss(w'x_i, y_i) + (lam/2) * ||w||^2

with two smooth losses: the square loss (y - w'x)^2 (no 1/2 factor, so its
curvature coefficient is the constant 2) and the logistic loss
log(1 + exp(-y * w'x)). Per-sample derivatives are exposed as scalar
coefficients g_i and h_i with

    grad loss_i = g_i * x_i        hess loss_i = h_i * x_i x_i'

which is all the solver ever needs: gradients and Hessian-vector products
reduce to matrix-vector products with the data block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import expit

from .linalg import SparseBlock, spmv, spmv_transpose

__all__ = [
    "LossKind",
    "Objective",
    "loss_value",
    "loss_grad_coeff",
    "loss_hess_coeff",
    "grad_coeffs",
    "hess_coeffs",
    "objective_value",
    "full_gradient",
    "hess_vec_dense",
]


class LossKind(str, Enum):
    SQUARE = "square"
    LOGISTIC = "logistic"

    @property
    def self_concordance_m(self) -> float:
        """Self-concordance constant kept as metadata; nothing consumes it.

        The square loss is quadratic (constant 0). For the scalar logistic
        family we record 1.0, the slope bound |phi'''(t)| <= phi''(t).
        """
        return 0.0 if self is LossKind.SQUARE else 1.0


@dataclass(frozen=True)
class Objective:
    """Problem description: loss kind, l2 weight and data dimensions."""

    loss: LossKind
    lam: float
    n: int
    d: int

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")


def _check_margin(margin: float):
    if not math.isfinite(margin):
        raise ValueError(f"non-finite margin: {margin}")


def loss_value(obj: Objective, margin: float, label: float) -> float:
    _check_margin(margin)
    if obj.loss is LossKind.SQUARE:
        resid = label - margin
        return resid * resid
    z = label * margin
    # log(1 + exp(-z)) without overflow for large |z|
    return float(np.logaddexp(0.0, -z))


def loss_grad_coeff(obj: Objective, margin: float, label: float) -> float:
    """Scalar g with d/dw loss(w'x, y) = g * x."""
    _check_margin(margin)
    if obj.loss is LossKind.SQUARE:
        return 2.0 * (margin - label)
    return float(-label * expit(-label * margin))


def loss_hess_coeff(obj: Objective, margin: float, label: float) -> float:
    """Scalar h with d^2/dw^2 loss(w'x, y) = h * x x'."""
    _check_margin(margin)
    if obj.loss is LossKind.SQUARE:
        return 2.0
    z = label * margin
    return float(expit(z) * expit(-z))


def _check_margins(margins: np.ndarray):
    if not np.all(np.isfinite(margins)):
        raise ValueError("non-finite margin encountered")


def grad_coeffs(obj: Objective, margins: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vectorized per-sample gradient coefficients."""
    margins = np.asarray(margins, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    _check_margins(margins)
    if obj.loss is LossKind.SQUARE:
        return 2.0 * (margins - labels)
    return -labels * expit(-labels * margins)


def hess_coeffs(obj: Objective, margins: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Vectorized per-sample Hessian coefficients.

    Constant 2 for the square loss, so callers may pass arbitrary margins
    there (the result does not depend on the current iterate).
    """
    labels = np.asarray(labels, dtype=np.float64)
    if obj.loss is LossKind.SQUARE:
        return np.full(labels.shape[0], 2.0)
    margins = np.asarray(margins, dtype=np.float64)
    _check_margins(margins)
    z = labels * margins
    return expit(z) * expit(-z)


def _check_full_dims(obj: Objective, X: SparseBlock, y: np.ndarray, w: np.ndarray):
    if X.rows != obj.d or X.cols != obj.n:
        raise ValueError(f"data block is {X.rows}x{X.cols}, objective expects {obj.d}x{obj.n}")
    if y.shape[0] != obj.n:
        raise ValueError(f"labels have length {y.shape[0]}, expected {obj.n}")
    if w.shape[0] != obj.d:
        raise ValueError(f"iterate has length {w.shape[0]}, expected {obj.d}")


def objective_value(obj: Objective, X: SparseBlock, y: np.ndarray, w: np.ndarray) -> float:
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    _check_full_dims(obj, X, y, w)
    margins = spmv_transpose(X, w)
    _check_margins(margins)
    if obj.loss is LossKind.SQUARE:
        resid = y - margins
        data_term = float(np.dot(resid, resid)) / obj.n
    else:
        data_term = float(np.sum(np.logaddexp(0.0, -y * margins))) / obj.n
    return data_term + 0.5 * obj.lam * float(np.dot(w, w))


def full_gradient(obj: Objective, X: SparseBlock, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Gradient (1/n) * X g + lam * w on unpartitioned data."""
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    _check_full_dims(obj, X, y, w)
    margins = spmv_transpose(X, w)
    coeffs = grad_coeffs(obj, margins, y)
    return spmv(X, coeffs) / obj.n + obj.lam * w


def hess_vec_dense(obj: Objective, X: SparseBlock, y: np.ndarray, w: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Hessian-vector product (1/n) * X (h * X'u) + lam * u on unpartitioned data.

    For the square loss the coefficients are constant, so the result never
    touches ``w`` and is bitwise independent of it.
    """
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    _check_full_dims(obj, X, y, w)
    if u.shape[0] != obj.d:
        raise ValueError(f"direction has length {u.shape[0]}, expected {obj.d}")
    if obj.loss is LossKind.SQUARE:
        h = np.full(obj.n, 2.0)
    else:
        h = hess_coeffs(obj, spmv_transpose(X, w), y)
    z = spmv_transpose(X, u)
    return spmv(X, h * z) / obj.n + obj.lam * u
