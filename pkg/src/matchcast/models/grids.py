"""Hyperparameter grids for randomized search, one per algorithm.

Size-dependent entries are concretized at call time: neighbor counts
range over odd values up to the square root of the sample size, and
feature counts over the square root, half, and all of the filtered
feature set. ``boosted_deep`` is an extra preset over the gradient
boosting implementation with a slow-learning, deeper grid.
"""

import math

from ..errors import SpecError
from .base import Algorithm

#: Class-weight triples in label order (home, draw, away).
CLASS_WEIGHT_CHOICES = ((1, 2, 1), (3, 3, 4), (4, 3, 3))


def _feature_rule(n_features: int) -> list[int]:
    values = sorted({math.ceil(math.sqrt(n_features)),
                     math.ceil(n_features / 2), n_features})
    return [v for v in values if v >= 1]


def _neighbor_rule(n_rows: int) -> list[int]:
    top = max(3, math.isqrt(n_rows))
    return list(range(3, top + 1, 2))


def grid_for(name: str, n_rows: int, n_features: int) -> dict[str, list]:
    """Concrete search grid for an algorithm or preset name."""
    if name == "boosted_deep":
        return {
            "learning_rate": [0.01, 0.02, 0.03, 0.04],
            "n_rounds": list(range(10, 100, 10)),
            "max_depth": [4, 5, 6, 7, 8, 9, 10],
        }
    algorithm = Algorithm(name)
    if algorithm is Algorithm.DECISION_TREE:
        return {"criterion": ["gini", "entropy"], "max_depth": [2, 4, 6, 8, 10, 12]}
    if algorithm is Algorithm.GRADIENT_BOOSTING:
        return {
            "min_samples_leaf": [2, 5, 8],
            "min_samples_split": [3, 5, 7, 9],
            "max_features": _feature_rule(n_features),
            "max_depth": [2, 5, 7, 10],
            "learning_rate": [0.1, 1.0, 2.0],
            "subsample": [0.5, 0.8, 1.0],
        }
    if algorithm is Algorithm.KNN:
        return {"n_neighbors": _neighbor_rule(n_rows)}
    if algorithm is Algorithm.LOGISTIC_REGRESSION:
        return {"penalty": ["l1", "l2"], "class_weight": list(CLASS_WEIGHT_CHOICES)}
    if algorithm is Algorithm.RANDOM_FOREST:
        return {
            "min_samples_leaf": [2, 5, 8],
            "max_features": _feature_rule(n_features),
            "max_depth": [2, 5, 7, 10],
        }
    if algorithm in (Algorithm.VOTING_SOFT, Algorithm.VOTING_HARD, Algorithm.STACKING,
                     Algorithm.BASELINE_UNIFORM, Algorithm.BASELINE_STRATIFIED):
        return {}
    raise SpecError(f"no grid for {name!r}")


def base_algorithm(name: str) -> Algorithm:
    """Map a roster name (possibly a preset) to its implementation."""
    if name == "boosted_deep":
        return Algorithm.GRADIENT_BOOSTING
    return Algorithm(name)


_ALLOWED = {
    Algorithm.LOGISTIC_REGRESSION: {
        "penalty": {"l1", "l2"},
        "class_weight": None,
        "alpha": None,
        "max_iter": None,
        "tol": None,
    },
    Algorithm.DECISION_TREE: {
        "criterion": {"gini", "entropy"},
        "max_depth": None,
        "min_samples_split": None,
        "min_samples_leaf": None,
        "max_features": None,
    },
    Algorithm.RANDOM_FOREST: {
        "n_trees": None,
        "criterion": {"gini", "entropy"},
        "max_depth": None,
        "min_samples_split": None,
        "min_samples_leaf": None,
        "max_features": None,
        "bootstrap": None,
    },
    Algorithm.GRADIENT_BOOSTING: {
        "n_rounds": None,
        "learning_rate": None,
        "subsample": None,
        "max_depth": None,
        "min_samples_split": None,
        "min_samples_leaf": None,
        "max_features": None,
        "l2_leaf_reg": None,
    },
    Algorithm.KNN: {"n_neighbors": None},
    Algorithm.VOTING_SOFT: {"members": None},
    Algorithm.VOTING_HARD: {"members": None},
    Algorithm.STACKING: {"members": None},
    Algorithm.BASELINE_UNIFORM: {},
    Algorithm.BASELINE_STRATIFIED: {},
}

_NUMERIC_POSITIVE = {"alpha", "max_iter", "tol", "max_depth", "min_samples_split",
                     "min_samples_leaf", "max_features", "n_trees", "n_rounds",
                     "learning_rate", "subsample", "l2_leaf_reg", "n_neighbors"}


def validate_hyperparameters(algorithm: Algorithm, hyper: dict) -> None:
    allowed = _ALLOWED[algorithm]
    for name, value in hyper.items():
        if name not in allowed:
            raise SpecError(f"{algorithm.value} has no hyperparameter {name!r}")
        choices = allowed[name]
        if choices is not None and value not in choices:
            raise SpecError(f"{algorithm.value}.{name} must be one of {sorted(choices)}")
        if name in _NUMERIC_POSITIVE and value is not None:
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
                raise SpecError(f"{algorithm.value}.{name} must be a positive number")
        if name == "class_weight":
            if len(value) != 3 or any(w <= 0 for w in value):
                raise SpecError("class_weight must be three positive numbers")
        if name == "bootstrap" and not isinstance(value, bool):
            raise SpecError("bootstrap must be a boolean")
        if name == "members" and not isinstance(value, dict):
            raise SpecError("members must map algorithm names to hyperparameters")
