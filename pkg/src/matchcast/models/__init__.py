"""Classifier zoo behind one fit/predict contract, plus search and
attribution-driven feature elimination."""

from .base import (Algorithm, ClassifierSpec, PredictionOutcome, TrainedModel,
                   accuracy_on, argmax_result, fit, load_model, predict,
                   rows_to_xy, save_model)
from .grids import base_algorithm, grid_for, validate_hyperparameters
from .search import SearchDraw, random_search, search_grid
from .selection import feature_eliminate, permutation_attribution

__all__ = [
    "Algorithm", "ClassifierSpec", "PredictionOutcome", "TrainedModel",
    "accuracy_on", "argmax_result", "fit", "predict", "rows_to_xy",
    "save_model", "load_model", "base_algorithm", "grid_for",
    "validate_hyperparameters", "SearchDraw", "random_search", "search_grid",
    "feature_eliminate", "permutation_attribution",
]
