"""Uniform classifier contract: fit on labeled rows, emit confidence triples.

Every algorithm trains against the same (n, f) float matrix and integer
labels in the fixed class order Home, Draw, Away. Predictions are
probability triples summing to 1; the predicted class is the argmax with
ties broken in class order.
"""

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import DegenerateFitError, InputError, SpecError
from ..features import FEATURE_COLUMNS, FeatureVector
from ..ingest import RESULT_ORDER, Result

MODEL_FORMAT_VERSION = 1

N_CLASSES = 3


class Algorithm(str, Enum):
    LOGISTIC_REGRESSION = "logistic_regression"
    DECISION_TREE = "decision_tree"
    RANDOM_FOREST = "random_forest"
    GRADIENT_BOOSTING = "gradient_boosting"
    KNN = "knn"
    VOTING_SOFT = "voting_soft"
    VOTING_HARD = "voting_hard"
    STACKING = "stacking"
    BASELINE_UNIFORM = "baseline_uniform"
    BASELINE_STRATIFIED = "baseline_stratified"


@dataclass(frozen=True)
class ClassifierSpec:
    algorithm: Algorithm
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def validate(self) -> None:
        from .grids import validate_hyperparameters
        validate_hyperparameters(self.algorithm, self.hyperparameters)


@dataclass(frozen=True)
class PredictionOutcome:
    match_key: tuple[str, str, str, str]
    confidences: tuple[float, float, float]  # (home, draw, away)
    predicted: Result
    actual: Result
    model_id: str

    @property
    def correct(self) -> bool:
        return self.predicted == self.actual

    @property
    def confidence(self) -> float:
        return max(self.confidences)


def argmax_result(triple) -> Result:
    """Largest confidence wins; ties break Home > Draw > Away."""
    return RESULT_ORDER[int(np.argmax(np.asarray(triple)))]


def rows_to_xy(rows: list[FeatureVector],
               feature_names: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    x = np.empty((len(rows), len(feature_names)))
    y = np.empty(len(rows), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, name in enumerate(feature_names):
            if name not in row.values:
                raise InputError(f"row {row.key} is missing feature {name!r}")
            x[i, j] = row.values[name]
        y[i] = row.label.index
    return x, y


def stable_digest(*parts) -> int:
    """64-bit digest of stringified parts; hash-seed independent."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "big")


@dataclass
class TrainedModel:
    """A fitted classifier plus the features it was trained on."""

    spec: ClassifierSpec
    selected_features: tuple[str, ...]
    impl: object
    window_id: str = ""

    @property
    def model_id(self) -> str:
        return self.spec.algorithm.value

    def predict_proba_matrix(self, x: np.ndarray) -> np.ndarray:
        return self.impl.predict_proba(np.asarray(x, dtype=float))

    def predict(self, row: FeatureVector) -> PredictionOutcome:
        x = np.empty((1, len(self.selected_features)))
        for j, name in enumerate(self.selected_features):
            if name not in row.values:
                raise InputError(f"missing feature {name!r} for {row.key}")
            x[0, j] = row.values[name]
        proba = self.impl.predict_proba(x)[0]
        return PredictionOutcome(
            match_key=row.key,
            confidences=tuple(float(p) for p in proba),
            predicted=argmax_result(proba),
            actual=row.label,
            model_id=self.model_id,
        )

    def predict_rows(self, rows: list[FeatureVector]) -> list[PredictionOutcome]:
        if not rows:
            return []
        x, _ = rows_to_xy(rows, self.selected_features)
        probas = self.impl.predict_proba(x)
        return [
            PredictionOutcome(
                match_key=row.key,
                confidences=tuple(float(p) for p in proba),
                predicted=argmax_result(proba),
                actual=row.label,
                model_id=self.model_id,
            )
            for row, proba in zip(rows, probas)
        ]


def accuracy_on(model: TrainedModel, rows: list[FeatureVector]) -> float:
    if not rows:
        raise ValueError("cannot score an empty row list")
    outcomes = model.predict_rows(rows)
    return sum(o.correct for o in outcomes) / len(outcomes)


def check_fit_preconditions(y: np.ndarray) -> None:
    if y.shape[0] < 10:
        raise DegenerateFitError(f"training window has only {y.shape[0]} rows")
    if np.unique(y).size < 2:
        raise DegenerateFitError("training window contains a single label")


def fit(spec: ClassifierSpec, rows: list[FeatureVector],
        feature_names: tuple[str, ...] | None = None,
        window_id: str = "") -> TrainedModel:
    """Train ``spec`` on labeled rows; deterministic for a fixed seed."""
    from .registry import build_impl
    spec.validate()
    names = tuple(feature_names) if feature_names is not None else FEATURE_COLUMNS
    if not names:
        raise SpecError("selected feature set is empty")
    x, y = rows_to_xy(rows, names)
    check_fit_preconditions(y)
    impl = build_impl(spec)
    impl.fit(x, y)
    return TrainedModel(spec=spec, selected_features=names, impl=impl,
                        window_id=window_id)


def predict(model: TrainedModel, row: FeatureVector) -> PredictionOutcome:
    return model.predict(row)


# ---------------------------------------------------------------------------
# Versioned model files

def save_model(model: TrainedModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "algorithm": model.spec.algorithm.value,
        "hyperparameters": _jsonable(model.spec.hyperparameters),
        "seed": model.spec.seed,
        "selected_features": list(model.selected_features),
        "window_id": model.window_id,
        "state": model.impl.get_state(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> TrainedModel:
    from .registry import impl_from_state
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise SpecError(f"unsupported model format version {version!r}")
    spec = ClassifierSpec(
        algorithm=Algorithm(payload["algorithm"]),
        hyperparameters=_tupleize(payload["hyperparameters"]),
        seed=payload["seed"],
    )
    impl = impl_from_state(spec, payload["state"])
    return TrainedModel(spec=spec,
                        selected_features=tuple(payload["selected_features"]),
                        impl=impl,
                        window_id=payload.get("window_id", ""))


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _tupleize(value):
    # Hyperparameter tuples (class weights) come back from JSON as lists.
    if isinstance(value, dict):
        return {k: _tupleize(v) for k, v in value.items()}
    if isinstance(value, list):
        return tuple(_tupleize(v) for v in value)
    return value
