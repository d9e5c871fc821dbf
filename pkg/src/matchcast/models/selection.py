"""Permutation attribution and the iterative feature-elimination loop.

A feature's attribution is the mean validation accuracy drop over R
column permutations. Each loop iteration drops every feature whose
attribution is non-positive and refits; the loop stops when nothing
drops or fewer than two features remain, and the iteration with the
best validation accuracy supplies the returned model.
"""

import logging

import numpy as np

from ..errors import ProtocolError
from ..features import FeatureVector
from .base import ClassifierSpec, TrainedModel, fit, rows_to_xy

PERMUTATION_ROUNDS = 10

log = logging.getLogger(__name__)


def permutation_attribution(model: TrainedModel,
                            validation_rows: list[FeatureVector],
                            rounds: int = PERMUTATION_ROUNDS,
                            seed: int = 0) -> dict[str, float]:
    """Mean accuracy drop on the validation window per permuted feature."""
    if not validation_rows:
        raise ProtocolError("validation window is empty")
    x, y = rows_to_xy(validation_rows, model.selected_features)
    base = float((model.predict_proba_matrix(x).argmax(axis=1) == y).mean())
    rng = np.random.default_rng(seed)
    attributions = {}
    for j, name in enumerate(model.selected_features):
        drops = np.empty(rounds)
        for r in range(rounds):
            permuted = x.copy()
            permuted[:, j] = permuted[rng.permutation(x.shape[0]), j]
            acc = float((model.predict_proba_matrix(permuted).argmax(axis=1) == y).mean())
            drops[r] = base - acc
        attributions[name] = float(drops.mean())
    return attributions


def feature_eliminate(spec: ClassifierSpec,
                      train_rows: list[FeatureVector],
                      validation_rows: list[FeatureVector],
                      feature_names: tuple[str, ...] | None = None,
                      rounds: int = PERMUTATION_ROUNDS) -> TrainedModel:
    """Iteratively drop non-informative features, keep the best model.

    Starts from the full catalogue (or ``feature_names``), never applied
    to the ensemble algorithms by the protocol driver. Accuracy ties
    between iterations prefer the smaller feature set.
    """
    if not validation_rows:
        raise ProtocolError("validation window is empty")
    from ..features import FEATURE_COLUMNS
    features = tuple(feature_names) if feature_names is not None else FEATURE_COLUMNS

    best_model: TrainedModel | None = None
    best_accuracy = -1.0
    iteration = 0
    while True:
        model = fit(spec, train_rows, features)
        x, y = rows_to_xy(validation_rows, features)
        accuracy = float((model.predict_proba_matrix(x).argmax(axis=1) == y).mean())
        if accuracy >= best_accuracy:
            best_model, best_accuracy = model, accuracy
        if len(features) < 2:
            break
        attributions = permutation_attribution(
            model, validation_rows, rounds=rounds,
            seed=spec.seed + iteration)
        keep = tuple(f for f in features if attributions[f] > 0.0)
        if len(keep) == len(features):
            break
        if not keep:  # keep the single best-attributed feature fittable
            keep = (max(features, key=lambda f: attributions[f]),)
        log.debug("elimination round %d: %d -> %d features",
                  iteration, len(features), len(keep))
        features = keep
        iteration += 1
    return best_model
