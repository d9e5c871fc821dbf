"""Dummy baselines that ignore the features when predicting.

Draws are keyed by a digest of (seed, feature row), so predictions are
pure functions of the model and the row, independent of call order.
"""

import numpy as np

from .base import N_CLASSES, stable_digest


class _RandomPickModel:
    def __init__(self, seed: int = 0):
        self.seed = seed
        self.class_probs_ = [1.0 / N_CLASSES] * N_CLASSES

    def _class_for_row(self, row: np.ndarray) -> int:
        u = stable_digest(self.seed, row.tobytes()) / 2.0 ** 64
        cumulative = 0.0
        for c, p in enumerate(self.class_probs_):
            cumulative += p
            if u < cumulative:
                return c
        return N_CLASSES - 1

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((x.shape[0], N_CLASSES))
        for i in range(x.shape[0]):
            out[i, self._class_for_row(np.ascontiguousarray(x[i]))] = 1.0
        return out

    def get_state(self) -> dict:
        return {"class_probs": list(self.class_probs_), "seed": self.seed}

    def set_state(self, state: dict) -> None:
        self.class_probs_ = list(state["class_probs"])
        self.seed = state["seed"]


class BaselineUniformModel(_RandomPickModel):
    """Uniform-random class pick."""

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        self.class_probs_ = [1.0 / N_CLASSES] * N_CLASSES


class BaselineStratifiedModel(_RandomPickModel):
    """Random class pick following the training label distribution."""

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        counts = np.bincount(y, minlength=N_CLASSES)
        self.class_probs_ = (counts / counts.sum()).tolist()
