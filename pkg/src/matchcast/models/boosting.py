"""Gradient-boosted regression trees for the three-way outcome.

One regression tree per class per round fits the softmax residuals;
leaf values are Newton steps with an L2 penalty on leaf weights, so the
implementation stands in for the regularized boosting family. The
multinomial deviance on the training window is recorded per round.
"""

import numpy as np

from .base import N_CLASSES
from .linear import softmax


def _grow_reg_tree(x, grad, hess, indices, depth, params, rng):
    g_total = grad[indices].sum()
    h_total = hess[indices].sum()
    lam = params["l2_leaf_reg"]
    leaf = {"w": float(-g_total / (h_total + lam))}
    if depth >= params["max_depth"] or len(indices) < params["min_samples_split"]:
        return leaf

    n_features = x.shape[1]
    m = params["max_features"]
    if m is None or m >= n_features:
        feature_ids = range(n_features)
    else:
        feature_ids = np.sort(rng.choice(n_features, size=m, replace=False))

    min_leaf = params["min_samples_leaf"]
    parent_score = g_total * g_total / (h_total + lam)
    best = None  # (gain, feature, threshold)
    n = len(indices)
    for f in feature_ids:
        values = x[indices, f]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        g_prefix = np.cumsum(grad[indices][order])
        h_prefix = np.cumsum(hess[indices][order])
        for i in range(min_leaf - 1, n - min_leaf):
            if sorted_vals[i] == sorted_vals[i + 1]:
                continue
            gl, hl = g_prefix[i], h_prefix[i]
            gr, hr = g_total - gl, h_total - hl
            gain = (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score) / 2.0
            if gain > 1e-12 and (best is None or gain > best[0] + 1e-15):
                best = (gain, f, (sorted_vals[i] + sorted_vals[i + 1]) / 2.0)
    if best is None:
        return leaf
    _, feature, threshold = best
    mask = x[indices, feature] <= threshold
    return {
        "feature": int(feature),
        "threshold": float(threshold),
        "left": _grow_reg_tree(x, grad, hess, indices[mask], depth + 1, params, rng),
        "right": _grow_reg_tree(x, grad, hess, indices[~mask], depth + 1, params, rng),
    }


def _reg_tree_predict(node, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        cur = node
        while "w" not in cur:
            cur = cur["left"] if x[i, cur["feature"]] <= cur["threshold"] else cur["right"]
        out[i] = cur["w"]
    return out


def multinomial_deviance(scores: np.ndarray, y: np.ndarray) -> float:
    p = softmax(scores)
    picked = np.clip(p[np.arange(len(y)), y], 1e-300, None)
    return float(-np.mean(np.log(picked)))


class GradientBoostingModel:
    def __init__(self, n_rounds: int = 60, learning_rate: float = 0.1,
                 subsample: float = 1.0, max_depth: int = 3,
                 min_samples_split: int = 2, min_samples_leaf: int = 1,
                 max_features: int | None = None, l2_leaf_reg: float = 1.0,
                 seed: int = 0):
        self.n_rounds = int(n_rounds)
        self.learning_rate = float(learning_rate)
        self.subsample = float(subsample)
        self.tree_params = {
            "max_depth": int(max_depth),
            "min_samples_split": int(min_samples_split),
            "min_samples_leaf": int(min_samples_leaf),
            "max_features": max_features,
            "l2_leaf_reg": float(l2_leaf_reg),
        }
        self.seed = seed
        self.base_score_: list[float] | None = None
        self.rounds_: list[list[dict]] = []
        self.train_losses_: list[float] = []

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        rng = np.random.default_rng(self.seed)
        n = x.shape[0]
        priors = np.bincount(y, minlength=N_CLASSES) / n
        base = np.log(np.clip(priors, 1e-12, None))
        base -= base.mean()
        self.base_score_ = base.tolist()

        scores = np.tile(base, (n, 1))
        y_onehot = np.eye(N_CLASSES)[y]
        self.rounds_ = []
        self.train_losses_ = [multinomial_deviance(scores, y)]
        for _ in range(self.n_rounds):
            p = softmax(scores)
            grad = p - y_onehot
            hess = np.maximum(p * (1.0 - p), 1e-16)
            if self.subsample < 1.0:
                size = max(1, int(round(self.subsample * n)))
                indices = np.sort(rng.choice(n, size=size, replace=False))
            else:
                indices = np.arange(n)
            round_trees = []
            for c in range(N_CLASSES):
                tree = _grow_reg_tree(x, grad[:, c], hess[:, c], indices, 0,
                                      self.tree_params, rng)
                round_trees.append(tree)
                scores[:, c] += self.learning_rate * _reg_tree_predict(tree, x)
            self.rounds_.append(round_trees)
            self.train_losses_.append(multinomial_deviance(scores, y))

    def decision_scores(self, x: np.ndarray) -> np.ndarray:
        scores = np.tile(np.asarray(self.base_score_), (x.shape[0], 1))
        for round_trees in self.rounds_:
            for c, tree in enumerate(round_trees):
                scores[:, c] += self.learning_rate * _reg_tree_predict(tree, x)
        return scores

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self.decision_scores(x))

    def get_state(self) -> dict:
        return {
            "base_score": self.base_score_,
            "rounds": self.rounds_,
            "train_losses": self.train_losses_,
        }

    def set_state(self, state: dict) -> None:
        self.base_score_ = state["base_score"]
        self.rounds_ = state["rounds"]
        self.train_losses_ = list(state.get("train_losses", []))
