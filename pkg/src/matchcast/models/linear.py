"""Multinomial logistic regression trained with proximal gradient descent.

Supports an L1 or L2 penalty (bias excluded) and a per-class weight map.
Inputs are standardized per training window. The smooth objective and
its analytic gradient are exposed for verification against finite
differences.
"""

import numpy as np

from .base import N_CLASSES


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _soft_threshold(w: np.ndarray, radius: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - radius, 0.0)


class LogisticRegressionModel:
    """Softmax regression; deterministic (zero init, fixed iteration)."""

    def __init__(self, penalty: str = "l2", class_weight=(1.0, 1.0, 1.0),
                 alpha: float = 0.01, max_iter: int = 500, tol: float = 1e-9,
                 seed: int = 0):
        self.penalty = penalty
        self.class_weight = tuple(float(w) for w in class_weight)
        self.alpha = float(alpha)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.seed = seed
        self.coef_ = None       # (f + 1, 3), bias in the last row
        self.mean_ = None
        self.scale_ = None

    # -- objective ----------------------------------------------------------

    def _design(self, x: np.ndarray) -> np.ndarray:
        xs = (x - self.mean_) / self.scale_
        return np.hstack([xs, np.ones((xs.shape[0], 1))])

    def smooth_objective(self, w_flat: np.ndarray, x1: np.ndarray,
                         y_onehot: np.ndarray,
                         sample_weight: np.ndarray) -> tuple[float, np.ndarray]:
        """Weighted cross entropy plus the L2 term (L1 is handled by the
        proximal step, not here). Returns (loss, gradient)."""
        w = w_flat.reshape(x1.shape[1], N_CLASSES)
        p = softmax(x1 @ w)
        total = sample_weight.sum()
        picked = np.clip(p[np.arange(len(y_onehot)), y_onehot.argmax(axis=1)], 1e-300, None)
        loss = -(sample_weight * np.log(picked)).sum() / total
        grad = x1.T @ ((p - y_onehot) * sample_weight[:, None]) / total
        if self.penalty == "l2":
            loss += 0.5 * self.alpha * float((w[:-1] ** 2).sum())
            grad[:-1] += self.alpha * w[:-1]
        return float(loss), grad.ravel()

    def objective(self, w_flat: np.ndarray, x: np.ndarray,
                  y: np.ndarray) -> tuple[float, np.ndarray]:
        """Full training objective at arbitrary parameters (smooth part)."""
        x1 = self._design(x)
        y_onehot = np.eye(N_CLASSES)[y]
        sw = self._sample_weights(y)
        return self.smooth_objective(w_flat, x1, y_onehot, sw)

    def _sample_weights(self, y: np.ndarray) -> np.ndarray:
        weights = np.asarray(self.class_weight, dtype=float)
        weights = weights / weights.mean()
        return weights[y]

    # -- training -----------------------------------------------------------

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        self.mean_ = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale

        x1 = self._design(x)
        y_onehot = np.eye(N_CLASSES)[y]
        sw = self._sample_weights(y)
        n_params = x1.shape[1] * N_CLASSES

        w = np.zeros(n_params)
        z = w.copy()
        theta = 1.0
        step = 1.0
        l1_radius = self.alpha if self.penalty == "l1" else 0.0

        def prox(v: np.ndarray, t: float) -> np.ndarray:
            if not l1_radius:
                return v
            shaped = v.reshape(x1.shape[1], N_CLASSES).copy()
            shaped[:-1] = _soft_threshold(shaped[:-1], t * l1_radius)
            return shaped.ravel()

        for _ in range(self.max_iter):
            loss_z, grad_z = self.smooth_objective(z, x1, y_onehot, sw)
            while True:
                w_new = prox(z - step * grad_z, step)
                diff = w_new - z
                quad = loss_z + grad_z @ diff + (diff @ diff) / (2.0 * step)
                if self.smooth_objective(w_new, x1, y_onehot, sw)[0] <= quad + 1e-12:
                    break
                step *= 0.5
                if step < 1e-12:
                    break
            theta_new = (1.0 + np.sqrt(1.0 + 4.0 * theta * theta)) / 2.0
            z = w_new + ((theta - 1.0) / theta_new) * (w_new - w)
            converged = np.max(np.abs(w_new - w)) < self.tol
            w, theta = w_new, theta_new
            if converged:
                break
        self.coef_ = w.reshape(x1.shape[1], N_CLASSES)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return softmax(self._design(x) @ self.coef_)

    # -- state --------------------------------------------------------------

    def get_state(self) -> dict:
        return {
            "coef": self.coef_.tolist(),
            "mean": self.mean_.tolist(),
            "scale": self.scale_.tolist(),
        }

    def set_state(self, state: dict) -> None:
        self.coef_ = np.asarray(state["coef"], dtype=float)
        self.mean_ = np.asarray(state["mean"], dtype=float)
        self.scale_ = np.asarray(state["scale"], dtype=float)
