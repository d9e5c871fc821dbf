"""CART-style classification tree with gini or entropy splitting."""

import numpy as np

from ..errors import SpecError
from .base import N_CLASSES


def gini_impurity(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts / total
    return float(1.0 - (p * p).sum())


def entropy_impurity(counts: np.ndarray) -> float:
    total = counts.sum()
    p = counts / total
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


_CRITERIA = {"gini": gini_impurity, "entropy": entropy_impurity}


def _best_split(x, y, indices, feature_ids, criterion, min_samples_leaf):
    """Exhaustive search over midpoints; ties resolve to the lowest
    feature index then the lowest threshold."""
    impurity = _CRITERIA[criterion]
    n = len(indices)
    best = None  # (weighted_impurity, feature, threshold)
    parent_counts = np.bincount(y[indices], minlength=N_CLASSES)
    parent_impurity = impurity(parent_counts)
    for f in feature_ids:
        values = x[indices, f]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_labels = y[indices][order]
        onehot = np.eye(N_CLASSES, dtype=np.int64)[sorted_labels]
        prefix = np.cumsum(onehot, axis=0)
        for i in range(min_samples_leaf - 1, n - min_samples_leaf):
            if sorted_vals[i] == sorted_vals[i + 1]:
                continue
            left_counts = prefix[i]
            right_counts = parent_counts - left_counts
            n_left = i + 1
            weighted = (n_left * impurity(left_counts)
                        + (n - n_left) * impurity(right_counts)) / n
            threshold = (sorted_vals[i] + sorted_vals[i + 1]) / 2.0
            if best is None or weighted < best[0] - 1e-15:
                best = (weighted, f, threshold)
    if best is None or best[0] >= parent_impurity - 1e-12:
        return None
    return best[1], best[2]


def _grow(x, y, indices, depth, params, rng):
    counts = np.bincount(y[indices], minlength=N_CLASSES)
    leaf = {"dist": (counts / counts.sum()).tolist()}
    if ((params["max_depth"] is not None and depth >= params["max_depth"])
            or len(indices) < params["min_samples_split"]
            or np.count_nonzero(counts) < 2):
        return leaf

    n_features = x.shape[1]
    m = params["max_features"]
    if m is None or m >= n_features:
        feature_ids = range(n_features)
    else:
        feature_ids = np.sort(rng.choice(n_features, size=m, replace=False))

    split = _best_split(x, y, indices, feature_ids,
                        params["criterion"], params["min_samples_leaf"])
    if split is None:
        return leaf
    feature, threshold = split
    mask = x[indices, feature] <= threshold
    return {
        "feature": int(feature),
        "threshold": float(threshold),
        "left": _grow(x, y, indices[mask], depth + 1, params, rng),
        "right": _grow(x, y, indices[~mask], depth + 1, params, rng),
    }


def tree_predict_proba(node: dict, x: np.ndarray) -> np.ndarray:
    out = np.empty((x.shape[0], N_CLASSES))
    for i in range(x.shape[0]):
        cur = node
        while "dist" not in cur:
            cur = cur["left"] if x[i, cur["feature"]] <= cur["threshold"] else cur["right"]
        out[i] = cur["dist"]
    return out


class DecisionTreeModel:
    def __init__(self, criterion: str = "gini", max_depth: int | None = None,
                 min_samples_split: int = 2, min_samples_leaf: int = 1,
                 max_features: int | None = None, seed: int = 0):
        if criterion not in _CRITERIA:
            raise SpecError(f"unknown criterion {criterion!r}")
        self.params = {
            "criterion": criterion,
            "max_depth": max_depth,
            "min_samples_split": int(min_samples_split),
            "min_samples_leaf": int(min_samples_leaf),
            "max_features": max_features,
        }
        self.seed = seed
        self.root_ = None

    def fit(self, x: np.ndarray, y: np.ndarray,
            rng: np.random.Generator | None = None) -> None:
        rng = rng or np.random.default_rng(self.seed)
        self.root_ = _grow(x, y, np.arange(x.shape[0]), 0, self.params, rng)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return tree_predict_proba(self.root_, x)

    def get_state(self) -> dict:
        return {"root": self.root_}

    def set_state(self, state: dict) -> None:
        self.root_ = state["root"]
