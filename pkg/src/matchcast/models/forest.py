"""Bagged decision trees with per-split feature subsampling."""

import math

import numpy as np

from .tree import DecisionTreeModel


class RandomForestModel:
    """Averages the class distributions of bootstrap-trained trees.

    With one tree, ``bootstrap=False`` and all features available the
    forest reduces exactly to :class:`DecisionTreeModel`.
    """

    def __init__(self, n_trees: int = 50, criterion: str = "gini",
                 max_depth: int | None = None, min_samples_split: int = 2,
                 min_samples_leaf: int = 1, max_features: int | str | None = "sqrt",
                 bootstrap: bool = True, seed: int = 0):
        self.n_trees = int(n_trees)
        self.criterion = criterion
        self.max_depth = max_depth
        self.min_samples_split = int(min_samples_split)
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = seed
        self.trees_: list[DecisionTreeModel] = []

    def _resolve_max_features(self, n_features: int) -> int | None:
        if self.max_features == "sqrt":
            return math.ceil(math.sqrt(n_features))
        if self.max_features is None:
            return None
        return min(int(self.max_features), n_features)

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        n = x.shape[0]
        max_features = self._resolve_max_features(x.shape[1])
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        self.trees_ = []
        for tree_seed in seeds:
            rng = np.random.default_rng(tree_seed)
            if self.bootstrap:
                sample = rng.integers(0, n, size=n)
            else:
                sample = np.arange(n)
            tree = DecisionTreeModel(
                criterion=self.criterion,
                max_depth=self.max_depth,
                min_samples_split=self.min_samples_split,
                min_samples_leaf=self.min_samples_leaf,
                max_features=max_features,
            )
            tree.fit(x[sample], y[sample], rng=rng)
            self.trees_.append(tree)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        stacked = np.stack([tree.predict_proba(x) for tree in self.trees_])
        return stacked.mean(axis=0)

    def get_state(self) -> dict:
        return {"trees": [tree.get_state() for tree in self.trees_]}

    def set_state(self, state: dict) -> None:
        self.trees_ = []
        for tree_state in state["trees"]:
            tree = DecisionTreeModel(criterion=self.criterion)
            tree.set_state(tree_state)
            self.trees_.append(tree)
