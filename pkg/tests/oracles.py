"""Independent reference implementations for differential tests.

Deliberately naive (nested loops, dense matrices, projected gradient) and
kept apart from the library code paths they check.
"""

import numpy as np


def exhaustive_best_split(X, y, idx, features, min_samples_leaf=1):
    """Enumerate every (feature, midpoint) candidate; return (gini, f, thr)."""
    idx = list(idx)
    n_node = len(idx)
    best = None
    for f in sorted(int(f) for f in features):
        values = sorted({float(X[i, f]) for i in idx})
        for a, b in zip(values, values[1:]):
            thr = (a + b) / 2.0
            left = [i for i in idx if X[i, f] <= thr]
            right = [i for i in idx if X[i, f] > thr]
            n_l, n_r = len(left), len(right)
            if n_l < min_samples_leaf or n_r < min_samples_leaf:
                continue
            c1l = sum(int(y[i]) for i in left)
            c0l = n_l - c1l
            c1r = sum(int(y[i]) for i in right)
            c0r = n_r - c1r
            p0l, p1l = c0l / n_l, c1l / n_l
            p0r, p1r = c0r / n_r, c1r / n_r
            gini_l = 1.0 - (p0l * p0l + p1l * p1l)
            gini_r = 1.0 - (p0r * p0r + p1r * p1r)
            g = (n_l * gini_l + n_r * gini_r) / n_node
            if best is None or g < best[0]:
                best = (g, f, thr)
    return best


def rbf_matrix(A, B, gamma):
    A, B = np.asarray(A, float), np.asarray(B, float)
    out = np.empty((len(A), len(B)))
    for i in range(len(A)):
        for j in range(len(B)):
            out[i, j] = np.exp(-gamma * np.sum((A[i] - B[j]) ** 2))
    return out


def _project_box_hyperplane(v, y, C, tol=1e-12):
    """Project v onto {0 <= a <= C, a.y == 0} (y in {-1,+1}) by bisection."""
    def h(lam):
        return float(np.clip(v - lam * y, 0.0, C) @ y)

    lo, hi = -(np.max(np.abs(v)) + C + 1.0), (np.max(np.abs(v)) + C + 1.0)
    for _ in range(200):
        mid = (lo + hi) / 2.0
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return np.clip(v - ((lo + hi) / 2.0) * y, 0.0, C)


def qp_svm_oracle(X, y01, C, gamma, iters=60_000):
    """Dense projected-gradient solver for the soft-margin SVM dual.

    Returns (alpha, bias) with y mapped to {-1,+1}. Small-n only.
    """
    X = np.asarray(X, float)
    y = 2.0 * np.asarray(y01, float) - 1.0
    K = rbf_matrix(X, X, gamma)
    Q = np.outer(y, y) * K
    step = 1.0 / (np.linalg.eigvalsh(Q).max() + 1e-9)
    alpha = np.zeros(len(y))
    for _ in range(iters):
        grad = 1.0 - Q @ alpha
        new = _project_box_hyperplane(alpha + step * grad, y, C)
        if np.max(np.abs(new - alpha)) < 1e-12:
            alpha = new
            break
        alpha = new

    # bias: equality on strictly-inside alphas; otherwise the KKT box bounds
    # only trap it in an interval, whose midpoint is the canonical pick.
    # alpha = 0, y=+1  =>  f(x) >= 1  =>  b >= y - f_no_b   (lower bound)
    # alpha = 0, y=-1  =>  -f(x) >= 1 =>  b <= y - f_no_b   (upper bound)
    # alpha = C, y=+1  =>  f(x) <= 1  =>  b <= y - f_no_b   (upper bound)
    # alpha = C, y=-1  =>  -f(x) <= 1 =>  b >= y - f_no_b   (lower bound)
    f_no_b = (alpha * y) @ K
    g = y - f_no_b
    tau = 1e-8 * max(1.0, C)
    inner = (alpha > tau) & (alpha < C - tau)
    if inner.any():
        bias = float(np.mean(g[inner]))
    else:
        at_zero = alpha <= tau
        at_c = alpha >= C - tau
        lower = (at_zero & (y > 0)) | (at_c & (y < 0))
        upper = (at_zero & (y < 0)) | (at_c & (y > 0))
        lo = np.max(g[lower]) if lower.any() else None
        hi = np.min(g[upper]) if upper.any() else None
        if lo is not None and hi is not None:
            bias = float((lo + hi) / 2.0)
        else:
            bias = float(lo if lo is not None else (hi if hi is not None else 0.0))
    return alpha, bias


def qp_decision_values(X_train, y01, alpha, bias, gamma, X_probe):
    y = 2.0 * np.asarray(y01, float) - 1.0
    K = rbf_matrix(X_probe, X_train, gamma)
    return K @ (alpha * y) + bias


def recount_metrics(y_true, y_pred):
    """Brute-force accuracy/macro-F1 in percent, from raw pair counting."""
    pairs = list(zip(list(y_true), list(y_pred)))
    total = len(pairs)
    correct = sum(1 for t, p in pairs if t == p)
    accuracy = 100.0 * correct / total

    f1s = []
    for cls in (0, 1):
        tp = sum(1 for t, p in pairs if t == cls and p == cls)
        fp = sum(1 for t, p in pairs if t != cls and p == cls)
        fn = sum(1 for t, p in pairs if t == cls and p != cls)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    macro = 100.0 * (f1s[0] + f1s[1]) / 2.0
    confusion = [[sum(1 for t, p in pairs if t == r and p == c) for c in (0, 1)] for r in (0, 1)]
    return round(accuracy, 2), round(macro, 2), confusion
