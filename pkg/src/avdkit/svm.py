"""Soft-margin RBF SVM trained with sequential minimal optimization.

The dual is solved by pairwise alpha updates (Platt): the first index is any
KKT violator, the second is drawn uniformly at random from the remaining
indices (seeded), the pair is clipped to the [0, C] box, and the bias follows
Platt's update rules. Training ends when a full pass finds no violation
beyond kkt_tol, or after max_passes_without_progress consecutive passes
without an alpha update (the model is still returned, flagged unconverged).

Kernel rows are computed on demand and kept in a bounded LRU cache, so memory
stays O(n * cache_rows) instead of the full Gram matrix.
"""

from __future__ import annotations

import warnings
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .errors import ConstantFeatures, DimMismatch
from .forest import Prediction, check_dataset

_MAX_TOTAL_PASSES = 10_000


class NonConvergenceWarning(RuntimeWarning):
    """SMO returned before clearing every KKT violation."""


@dataclass(frozen=True)
class SvmConfig:
    C: float = 1.0
    gamma: float | str = "scale"  # "scale" -> 1 / (d * pooled variance)
    kkt_tol: float = 1e-3
    numeric_eps: float = 1e-12
    max_passes_without_progress: int = 10
    kernel_cache_rows: int = 512

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")
        if isinstance(self.gamma, str) and self.gamma != "scale":
            raise ValueError(f"gamma must be a positive number or 'scale', got {self.gamma!r}")
        if not isinstance(self.gamma, str) and self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (m, d)
    dual_coefs: np.ndarray       # (m,) alpha_i * y_i with y in {-1, +1}
    bias: float
    gamma: float
    converged: bool = True

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision_value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise DimMismatch(f"expected {self.n_features} features, got {x.shape}")
        if len(self.dual_coefs) == 0:
            return self.bias
        sq = np.sum((self.support_vectors - x) ** 2, axis=1)
        return float(self.dual_coefs @ np.exp(-self.gamma * sq) + self.bias)

    def predict(self, x) -> Prediction:
        f = self.decision_value(x)
        return Prediction(label=1 if f > 0 else 0, score=f)

    def predict_labels(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.array([self.predict(row).label for row in X], dtype=np.int64)


def resolve_gamma(X, numeric_eps: float = 1e-12) -> float:
    """gamma = 1 / (d * pooled population variance of every entry of X)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.size == 0:
        raise ValueError("X must be a nonempty 2-D matrix")
    var = float(X.var())
    if var <= numeric_eps:
        raise ConstantFeatures(f"pooled variance {var:g} is numerically zero")
    return 1.0 / (X.shape[1] * var)


class _KernelRowCache:
    """LRU cache of RBF kernel rows K(i, :) over the training matrix."""

    def __init__(self, X: np.ndarray, gamma: float, budget_rows: int):
        self._X = X
        self._gamma = gamma
        self._budget = max(1, budget_rows)
        self._sq = np.sum(X ** 2, axis=1)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(self, i: int) -> np.ndarray:
        hit = self._rows.get(i)
        if hit is not None:
            self._rows.move_to_end(i)
            return hit
        d2 = self._sq[i] + self._sq - 2.0 * (self._X @ self._X[i])
        row = np.exp(-self._gamma * np.maximum(d2, 0.0))
        self._rows[i] = row
        if len(self._rows) > self._budget:
            self._rows.popitem(last=False)
        return row


def _finalize_bias(alpha, y, f_no_bias, b_current, C, eps) -> float:
    """Pin the bias when no alpha is strictly inside the box.

    With free support vectors the converged bias already satisfies their
    equality constraints, so it is kept. Without them the KKT conditions only
    bound the bias to an interval; the midpoint is the canonical choice (and
    what makes the symmetric two-point problem give f(0) == 0 exactly).
    """
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return float(b_current)
    g = y - f_no_bias
    at_zero = alpha <= eps
    at_c = alpha >= C - eps
    lower = (at_zero & (y > 0)) | (at_c & (y < 0))   # constraints b >= g_i
    upper = (at_zero & (y < 0)) | (at_c & (y > 0))   # constraints b <= g_i
    if lower.any() and upper.any():
        return float((g[lower].max() + g[upper].min()) / 2.0)
    if lower.any():
        return float(g[lower].max())
    if upper.any():
        return float(g[upper].min())
    return float(b_current)


def svm_train(X, y, cfg: SvmConfig = SvmConfig(), seed: int = 0) -> SvmModel:
    """Fit the RBF SVM via SMO; labels are {0,1} and map to {-1,+1} internally."""
    X, y01 = check_dataset(X, y)
    n = X.shape[0]
    y = (2 * y01 - 1).astype(np.float64)
    gamma = resolve_gamma(X, cfg.numeric_eps) if cfg.gamma == "scale" else float(cfg.gamma)

    cache = _KernelRowCache(X, gamma, cfg.kernel_cache_rows)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed])))

    alpha = np.zeros(n)
    b = 0.0
    # f[i] = sum_j alpha_j y_j K(j, i) + b, maintained incrementally
    f = np.full(n, b)

    C = cfg.C
    tol = cfg.kkt_tol
    eps = cfg.numeric_eps
    converged = False
    stale_passes = 0

    def try_pair(i: int, j: int) -> bool:
        nonlocal b
        E_i = f[i] - y[i]
        E_j = f[j] - y[j]
        a_i_old, a_j_old = alpha[i], alpha[j]
        if y[i] != y[j]:
            L = max(0.0, a_j_old - a_i_old)
            H = min(C, C + a_j_old - a_i_old)
        else:
            L = max(0.0, a_i_old + a_j_old - C)
            H = min(C, a_i_old + a_j_old)
        if H - L < eps:
            return False

        K_i = cache.row(i)
        K_j = cache.row(j)
        eta = 2.0 * K_i[j] - K_i[i] - K_j[j]
        if eta >= -eps:
            return False
        a_j = a_j_old - y[j] * (E_i - E_j) / eta
        a_j = min(H, max(L, a_j))
        if abs(a_j - a_j_old) < eps:
            return False
        a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)

        b1 = b - E_i - y[i] * (a_i - a_i_old) * K_i[i] - y[j] * (a_j - a_j_old) * K_i[j]
        b2 = b - E_j - y[i] * (a_i - a_i_old) * K_i[j] - y[j] * (a_j - a_j_old) * K_j[j]
        if eps < a_i < C - eps:
            b_new = b1
        elif eps < a_j < C - eps:
            b_new = b2
        else:
            b_new = (b1 + b2) / 2.0

        f[:] += (a_i - a_i_old) * y[i] * K_i + (a_j - a_j_old) * y[j] * K_j + (b_new - b)
        alpha[i], alpha[j] = a_i, a_j
        b = b_new
        return True

    for _ in range(_MAX_TOTAL_PASSES):
        violations = 0
        updates = 0
        for i in range(n):
            E_i = f[i] - y[i]
            r_i = E_i * y[i]
            if not ((alpha[i] < C - eps and r_i < -tol) or (alpha[i] > eps and r_i > tol)):
                continue
            violations += 1
            # random second choice, then wrap-around scan if it makes no progress
            start = int(rng.integers(0, n))
            for off in range(n):
                j = (start + off) % n
                if j == i:
                    continue
                if try_pair(i, j):
                    updates += 1
                    break

        if violations == 0:
            converged = True
            break
        stale_passes = stale_passes + 1 if updates == 0 else 0
        if stale_passes >= cfg.max_passes_without_progress:
            break

    b = _finalize_bias(alpha, y, f - b, b, C, eps)

    if not converged:
        warnings.warn(
            "SMO pass budget exhausted with KKT violations remaining",
            NonConvergenceWarning,
        )

    keep = alpha > cfg.numeric_eps
    return SvmModel(
        support_vectors=X[keep].copy(),
        dual_coefs=(alpha * y)[keep],
        bias=b,
        gamma=gamma,
        converged=converged,
    )


def svm_predict(model: SvmModel, x) -> Prediction:
    return model.predict(x)


def rbf_kernel_matrix(A, B, gamma: float) -> np.ndarray:
    """Dense K(A, B); used by evaluation tooling and tests, not by SMO."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    d2 = (
        np.sum(A ** 2, axis=1)[:, None]
        + np.sum(B ** 2, axis=1)[None, :]
        - 2.0 * A @ B.T
    )
    return np.exp(-gamma * np.maximum(d2, 0.0))
