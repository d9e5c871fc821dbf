"""Randomized hyperparameter search scored on a held-out window.

Draws are independent uniform picks from each grid entry; the draw with
the best validation accuracy wins, earlier draws winning ties. No
cross-validation: the validation rows are a chronological window.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import SpecError
from ..features import FeatureVector
from .base import ClassifierSpec, accuracy_on, fit
from .grids import base_algorithm, grid_for


@dataclass(frozen=True)
class SearchDraw:
    spec: ClassifierSpec
    validation_accuracy: float


def random_search(algorithm: str, grid: dict[str, list], n_draws: int,
                  train_rows: list[FeatureVector],
                  validation_rows: list[FeatureVector],
                  seed: int,
                  feature_names: tuple[str, ...] | None = None,
                  base_hyperparameters: dict | None = None,
                  ) -> tuple[ClassifierSpec, list[SearchDraw]]:
    """Best spec over ``n_draws`` random grid picks, plus the trace.

    ``algorithm`` may be a preset name ("boosted_deep"); ``grid`` maps
    hyperparameter names to finite value lists (see
    :func:`matchcast.models.grids.grid_for`). ``base_hyperparameters``
    ride along on every draw unless the grid overrides them.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    if not grid:
        raise SpecError("empty grid")
    for name, values in grid.items():
        if not values:
            raise SpecError(f"grid entry {name!r} is empty")

    rng = np.random.default_rng(seed)
    impl_algorithm = base_algorithm(algorithm)
    base = dict(base_hyperparameters or {})
    best: SearchDraw | None = None
    draws: list[SearchDraw] = []
    for _ in range(n_draws):
        hyper = dict(base)
        hyper.update({name: values[rng.integers(len(values))]
                      for name, values in grid.items()})
        spec = ClassifierSpec(algorithm=impl_algorithm, hyperparameters=hyper, seed=seed)
        model = fit(spec, train_rows, feature_names)
        draw = SearchDraw(spec=spec, validation_accuracy=accuracy_on(model, validation_rows))
        draws.append(draw)
        if best is None or draw.validation_accuracy > best.validation_accuracy:
            best = draw
    return best.spec, draws


def search_grid(algorithm: str, train_rows: list[FeatureVector],
                feature_names: tuple[str, ...]) -> dict[str, list]:
    return grid_for(algorithm, len(train_rows), len(feature_names))
