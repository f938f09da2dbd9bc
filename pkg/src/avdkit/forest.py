"""Random forest of CART trees, built from scratch.

Splits minimize weighted Gini impurity over midpoint thresholds between
consecutive distinct values of a per-node random feature subset. Trees grow
until pure, too small to split, or no impurity-reducing split exists.

Determinism: tree t draws bootstrap indices and feature subsets from an RNG
stream derived from (seed, t), so the forest is identical however trees are
scheduled. Ties in the split search resolve to the lower feature index, then
the lower threshold; label ties resolve to class 0 (non-violence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, DimMismatch


@dataclass(frozen=True)
class RfConfig:
    n_trees: int = 100
    max_features: int | None = None  # None -> floor(sqrt(d)), clamped >= 1
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_depth: int | None = None
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")

    def resolve_max_features(self, d: int) -> int:
        if self.max_features is not None:
            return max(1, min(self.max_features, d))
        return max(1, int(math.floor(math.sqrt(d))))


@dataclass
class Prediction:
    label: int
    score: float


@dataclass
class Tree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray    # int64, -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray       # int64 child index, -1 for leaves
    right: np.ndarray
    counts: np.ndarray     # (n_nodes, 2) int64 class counts

    def leaf_for(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def vote(self, x: np.ndarray) -> int:
        # leaf tie -> class 0 (argmax picks the first maximum)
        return int(np.argmax(self.counts[self.leaf_for(x)]))


@dataclass
class RandomForestModel:
    trees: list[Tree]
    config: RfConfig
    train_seed: int
    n_features: int

    def predict(self, x) -> Prediction:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n_features,):
            raise DimMismatch(f"expected {self.n_features} features, got {x.shape}")
        votes = sum(t.vote(x) for t in self.trees)
        score = votes / len(self.trees)
        return Prediction(label=1 if votes > len(self.trees) - votes else 0, score=score)

    def predict_labels(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.array([self.predict(row).label for row in X], dtype=np.int64)


def check_dataset(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Shared training-set validation for both classifiers."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DegenerateData(f"misaligned shapes X{X.shape} y{y.shape}")
    if X.shape[0] < 2:
        raise DegenerateData("need at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise DegenerateData("non-finite feature values")
    if not np.all((y == 0) | (y == 1)):
        raise DegenerateData("labels must be in {0, 1}")
    if len(np.unique(y)) < 2:
        raise DegenerateData("training data holds a single class")
    return X, y


def _tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, tree_index])))


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    features: np.ndarray,
    min_samples_leaf: int = 1,
) -> tuple[float, int, float] | None:
    """Lowest-weighted-Gini (feature, midpoint) split over the given features.

    Returns (gini, feature, threshold) or None when no candidate exists.
    Candidates are midpoints between consecutive distinct sorted values.
    """
    n_node = len(idx)
    y_node = y[idx]
    total1 = int(y_node.sum())
    best: tuple[float, int, float] | None = None
    for f in np.sort(features):
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        cum1 = np.cumsum(y_node[order])
        pos = np.nonzero(sv[1:] > sv[:-1])[0]  # left block = sorted[0..p]
        if min_samples_leaf > 1:
            n_l_all = pos + 1
            pos = pos[(n_l_all >= min_samples_leaf) & (n_node - n_l_all >= min_samples_leaf)]
        if len(pos) == 0:
            continue
        n_l = pos + 1
        n_r = n_node - n_l
        c1l = cum1[pos]
        c0l = n_l - c1l
        c1r = total1 - c1l
        c0r = n_r - c1r
        p0l, p1l = c0l / n_l, c1l / n_l
        p0r, p1r = c0r / n_r, c1r / n_r
        gini_l = 1.0 - (p0l * p0l + p1l * p1l)
        gini_r = 1.0 - (p0r * p0r + p1r * p1r)
        weighted = (n_l * gini_l + n_r * gini_r) / n_node
        k = int(np.argmin(weighted))  # first minimum -> lowest threshold
        g = float(weighted[k])
        if best is None or g < best[0]:
            p = pos[k]
            best = (g, int(f), float((sv[p] + sv[p + 1]) / 2.0))
    return best


def _node_gini(y_node: np.ndarray) -> float:
    n = len(y_node)
    c1 = int(y_node.sum())
    c0 = n - c1
    p0, p1 = c0 / n, c1 / n
    return 1.0 - (p0 * p0 + p1 * p1)


def _grow_tree(X, y, sample_idx, cfg: RfConfig, rng: np.random.Generator) -> Tree:
    d = X.shape[1]
    m = cfg.resolve_max_features(d)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[np.ndarray] = []

    def new_node(idx) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(np.bincount(y[idx], minlength=2))
        return len(feature) - 1

    def split_node(node: int, idx: np.ndarray, depth: int) -> None:
        y_node = y[idx]
        if len(idx) < cfg.min_samples_split:
            return
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            return
        parent_gini = _node_gini(y_node)
        if parent_gini == 0.0:
            return
        cand = rng.choice(d, size=m, replace=False)
        found = best_split(X, y, idx, cand, cfg.min_samples_leaf)
        if found is None or not found[0] < parent_gini:
            return
        _, f, thr = found
        go_left = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = thr
        idx_l, idx_r = idx[go_left], idx[~go_left]
        left[node] = new_node(idx_l)
        split_node(left[node], idx_l, depth + 1)
        right[node] = new_node(idx_r)
        split_node(right[node], idx_r, depth + 1)

    root_idx = np.asarray(sample_idx)
    root = new_node(root_idx)
    split_node(root, root_idx, 0)
    return Tree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64),
    )


def rf_train(X, y, cfg: RfConfig = RfConfig(), seed: int = 0) -> RandomForestModel:
    """Train a forest; per-tree RNG streams make the result schedule-independent."""
    X, y = check_dataset(X, y)
    n = X.shape[0]
    trees = []
    for t in range(cfg.n_trees):
        rng = _tree_rng(seed, t)
        idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        trees.append(_grow_tree(X, y, idx, cfg, rng))
    return RandomForestModel(trees=trees, config=cfg, train_seed=seed, n_features=X.shape[1])


def rf_predict(model: RandomForestModel, x) -> Prediction:
    return model.predict(x)
