"""Soft-margin RBF-kernel SVM trained by sequential minimal optimization.

The solver works on the dual problem

    min  0.5 * a' Q a - sum(a)   s.t.  0 <= a_i <= C,  sum(y_i a_i) = 0

with Q_ij = y_i y_j K(x_i, x_j), picking at each iteration the maximal
violating pair with lowest-index tie-breaking, so results are fully
deterministic given the inputs.  Datasets here are tens of points, so the
design favors determinism and exactness over large-scale tricks; the inner
loop is jitted because consistency scoring retrains thousands of times per
simulated session.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .core import GAMMA_MEDIAN, DimensionMismatch, Meaning, SingleClass

SMO_TOL = 1e-6
_BOUND_SNAP = 1e-12


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """Gram matrix K[i, j] = exp(-gamma * ||a_i - b_j||^2)."""

    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def median_heuristic_gamma(points: np.ndarray) -> float:
    """gamma = 1 / (2 * median^2) over all pairwise distances.

    Scale-free: users may place their signals at any scale and the kernel
    width follows.  Falls back to 1.0 when there are no distinct pairs.
    """

    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = pts.shape[0]
    if n < 2:
        return 1.0
    sq = (
        np.sum(pts * pts, axis=1)[:, None]
        + np.sum(pts * pts, axis=1)[None, :]
        - 2.0 * (pts @ pts.T)
    )
    np.maximum(sq, 0.0, out=sq)
    iu = np.triu_indices(n, k=1)
    med = float(np.median(np.sqrt(sq[iu])))
    if med < 1e-12:
        return 1.0
    return 1.0 / (2.0 * med * med)


@njit(cache=True)
def _smo(K, y, C, tol, max_iter):  # pragma: no cover - exercised via callers
    n = K.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    while it < max_iter:
        it += 1
        m_val = -1e300
        m_idx = -1
        big_m_val = 1e300
        big_m_idx = -1
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0):
                if v > m_val:
                    m_val = v
                    m_idx = t
            if (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C):
                if v < big_m_val:
                    big_m_val = v
                    big_m_idx = t
        if m_idx < 0 or big_m_idx < 0 or m_val - big_m_val <= tol:
            break
        i = m_idx
        j = big_m_idx
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = 1e-12
        step = (m_val - big_m_val) / quad
        cap_i = (C - alpha[i]) if y[i] > 0.0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0.0 else (C - alpha[j])
        if cap_i < step:
            step = cap_i
        if cap_j < step:
            step = cap_j
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        for b in (i, j):
            if alpha[b] < _BOUND_SNAP * C:
                alpha[b] = 0.0
            elif alpha[b] > C * (1.0 - _BOUND_SNAP):
                alpha[b] = C
        for t in range(n):
            grad[t] += step * y[t] * (K[t, i] - K[t, j])

    # Bias: midpoint of the final violation interval; for free support
    # vectors both bounds collapse onto y_k - f0(x_k).
    m_val = -1e300
    big_m_val = 1e300
    for t in range(n):
        v = -y[t] * grad[t]
        if (y[t] > 0.0 and alpha[t] < C) or (y[t] < 0.0 and alpha[t] > 0.0):
            if v > m_val:
                m_val = v
        if (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < C):
            if v < big_m_val:
                big_m_val = v
    if m_val <= -1e299 and big_m_val >= 1e299:
        bias = 0.0
    elif m_val <= -1e299:
        bias = big_m_val
    elif big_m_val >= 1e299:
        bias = m_val
    else:
        bias = 0.5 * (m_val + big_m_val)

    # Dual objective, maximization form: sum(a) - 0.5 a'Qa = 0.5*(sum(a) - a'grad)
    asum = 0.0
    agrad = 0.0
    for t in range(n):
        asum += alpha[t]
        agrad += alpha[t] * grad[t]
    objective = 0.5 * (asum - agrad)
    return alpha, bias, objective, it


def solve_dual(
    K: np.ndarray, y: np.ndarray, C: float, tol: float = SMO_TOL
) -> tuple[np.ndarray, float, float]:
    """Run SMO on a precomputed kernel matrix; returns (alpha, bias, objective)."""

    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = K.shape[0]
    max_iter = 20_000 + 500 * n
    alpha, bias, objective, _ = _smo(K, y, float(C), float(tol), max_iter)
    return alpha, float(bias), float(objective)


@dataclass
class DecisionFunction:
    """Evaluable kernel expansion; the sign of ``evaluate`` predicts the meaning."""

    support_points: np.ndarray
    coefficients: np.ndarray  # alpha_i * y_i per support point
    bias: float
    gamma: float
    dual_objective: float

    def evaluate(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if pts.shape[1] != self.support_points.shape[1]:
            raise DimensionMismatch(
                f"expected dimension {self.support_points.shape[1]}, got {pts.shape[1]}"
            )
        if len(self.support_points) == 0:
            return np.full(len(pts), self.bias)
        k = rbf_kernel(pts, self.support_points, self.gamma)
        return k @ self.coefficients + self.bias

    def predict(self, points) -> list[Meaning]:
        values = self.evaluate(points)
        return [Meaning.YELLOW if v >= 0.0 else Meaning.GREY for v in values]


def meanings_to_signs(labels: Sequence[Meaning]) -> np.ndarray:
    return np.array([1.0 if m is Meaning.YELLOW else -1.0 for m in labels])


def resolve_gamma(setting, points: np.ndarray) -> float:
    if setting == GAMMA_MEDIAN:
        return median_heuristic_gamma(points)
    return float(setting)


def train_rbf_svm(data, C: float, gamma) -> DecisionFunction:
    """Fit the soft-margin RBF SVM on ``data``: pairs of (vector, Meaning).

    ``gamma`` is a positive float or ``"median"``.  Deterministic: identical
    inputs give identical support coefficients and bias.
    """

    if len(data) == 0:
        raise SingleClass("cannot train on an empty dataset")
    vectors = [np.asarray(v, dtype=np.float64).ravel() for v, _ in data]
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed feature dimensions: {sorted(dims)}")
    X = np.vstack(vectors)
    if not np.all(np.isfinite(X)):
        raise ValueError("training vectors must be finite")
    labels = [m for _, m in data]
    if len(set(labels)) < 2:
        raise SingleClass("training needs at least one point of each meaning")
    y = meanings_to_signs(labels)
    g = resolve_gamma(gamma, X)
    K = rbf_kernel(X, X, g)
    alpha, bias, objective = solve_dual(K, y, C)
    keep = alpha > 1e-12
    return DecisionFunction(
        support_points=X[keep],
        coefficients=(alpha * y)[keep],
        bias=bias,
        gamma=g,
        dual_objective=objective,
    )
