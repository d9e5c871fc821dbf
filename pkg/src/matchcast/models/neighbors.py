"""k-nearest-neighbor classifier on standardized features."""

import numpy as np

from .base import N_CLASSES


class KnnModel:
    def __init__(self, n_neighbors: int = 5, seed: int = 0):
        self.n_neighbors = int(n_neighbors)
        self.seed = seed
        self.x_ = None
        self.y_ = None
        self.mean_ = None
        self.scale_ = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        self.mean_ = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        self.x_ = (x - self.mean_) / self.scale_
        self.y_ = y.astype(np.int64)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        xs = (np.asarray(x, dtype=float) - self.mean_) / self.scale_
        k = min(self.n_neighbors, self.x_.shape[0])
        out = np.empty((xs.shape[0], N_CLASSES))
        for i in range(xs.shape[0]):
            d2 = ((self.x_ - xs[i]) ** 2).sum(axis=1)
            nearest = np.argsort(d2, kind="stable")[:k]
            counts = np.bincount(self.y_[nearest], minlength=N_CLASSES)
            out[i] = counts / k
        return out

    def get_state(self) -> dict:
        return {
            "x": self.x_.tolist(),
            "y": self.y_.tolist(),
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
        }

    def set_state(self, state: dict) -> None:
        self.x_ = np.asarray(state["x"], dtype=float)
        self.y_ = np.asarray(state["y"], dtype=np.int64)
        self.mean_ = np.asarray(state["mean"], dtype=float)
        self.scale_ = np.asarray(state["scale"], dtype=float)
