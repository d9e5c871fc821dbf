import numpy as np
import pytest

from matchcast.errors import ProtocolError, SpecError
from matchcast.models import (Algorithm, ClassifierSpec, feature_eliminate,
                              grid_for, permutation_attribution, random_search)
from matchcast.models.base import accuracy_on, fit
from tests.conftest import rows_from_xy
from tests.test_models import NAMES2, separable_rows

# ---------------------------------------------------------------------------
# Grids


def test_table_grids_concretized():
    grid = grid_for("decision_tree", 100, 52)
    assert grid == {"criterion": ["gini", "entropy"],
                    "max_depth": [2, 4, 6, 8, 10, 12]}
    gb = grid_for("gradient_boosting", 100, 52)
    assert gb["learning_rate"] == [0.1, 1.0, 2.0]
    assert gb["subsample"] == [0.5, 0.8, 1.0]
    assert gb["max_features"] == [8, 26, 52]  # ceil(sqrt 52), ceil(52/2), 52
    assert grid_for("knn", 150, 52)["n_neighbors"] == [3, 5, 7, 9, 11]
    assert grid_for("knn", 10, 52)["n_neighbors"] == [3]
    lr = grid_for("logistic_regression", 100, 52)
    assert lr["penalty"] == ["l1", "l2"]
    assert (1, 2, 1) in lr["class_weight"]
    deep = grid_for("boosted_deep", 100, 52)
    assert deep["learning_rate"] == [0.01, 0.02, 0.03, 0.04]
    assert deep["n_rounds"] == list(range(10, 100, 10))
    assert deep["max_depth"] == [4, 5, 6, 7, 8, 9, 10]


# ---------------------------------------------------------------------------
# Random search


def test_single_draw_is_returned():
    rows, _x, _y = separable_rows(n=120, seed=20)
    best, draws = random_search("decision_tree", {"max_depth": [4]}, 1,
                                rows[:90], rows[90:], seed=0,
                                feature_names=NAMES2)
    assert len(draws) == 1
    assert best.hyperparameters == {"max_depth": 4}
    assert best == draws[0].spec


def test_search_is_deterministic_per_seed():
    rows, _x, _y = separable_rows(n=140, seed=21)
    grid = grid_for("decision_tree", 100, 2)
    _, draws_a = random_search("decision_tree", grid, 8, rows[:100], rows[100:],
                               seed=5, feature_names=NAMES2)
    _, draws_b = random_search("decision_tree", grid, 8, rows[:100], rows[100:],
                               seed=5, feature_names=NAMES2)
    assert [d.spec for d in draws_a] == [d.spec for d in draws_b]


def test_dominating_configuration_always_wins():
    # XOR-style checkerboard: depth 1 cannot fit, depth >= 2 can.
    rng = np.random.default_rng(22)
    x = rng.uniform(-1, 1, size=(400, 2))
    y = ((x[:, 0] > 0) ^ (x[:, 1] > 0)).astype(int)  # labels 0/1 only
    rows = rows_from_xy(x, y, NAMES2)
    for seed in range(5):
        best, _ = random_search("decision_tree",
                                {"criterion": ["gini"], "max_depth": [1, 6]},
                                6, rows[:300], rows[300:], seed=seed,
                                feature_names=NAMES2)
        assert best.hyperparameters["max_depth"] == 6


def test_tie_breaks_to_earlier_draw():
    rows, _x, _y = separable_rows(n=130, seed=23)
    # Both draws are the same configuration, so accuracies tie exactly.
    best, draws = random_search("knn", {"n_neighbors": [5]}, 3,
                                rows[:100], rows[100:], seed=0,
                                feature_names=NAMES2)
    assert best is draws[0].spec


def test_empty_grid_rejected():
    rows, _x, _y = separable_rows(n=40)
    with pytest.raises(SpecError):
        random_search("decision_tree", {}, 3, rows[:30], rows[30:], seed=0,
                      feature_names=NAMES2)


def test_boosted_deep_preset_builds_gradient_boosting():
    rows, _x, _y = separable_rows(n=120, seed=24)
    grid = {"learning_rate": [0.02], "n_rounds": [10], "max_depth": [4]}
    best, _ = random_search("boosted_deep", grid, 1, rows[:90], rows[90:],
                            seed=0, feature_names=NAMES2)
    assert best.algorithm is Algorithm.GRADIENT_BOOSTING


# ---------------------------------------------------------------------------
# Permutation attribution and elimination

NOISY = ("f0", "f1", "noise")


def noisy_rows(seed, n=450):
    rng = np.random.default_rng(seed)
    rows, x, y = separable_rows(n=n, seed=seed, noise=0.05, names=NOISY)
    for row in rows:
        row.values["noise"] = float(rng.normal())
    return rows


def test_attribution_separates_signal_from_noise():
    rows = noisy_rows(25)
    spec = ClassifierSpec(Algorithm.LOGISTIC_REGRESSION, seed=0)
    model = fit(spec, rows[:300], NOISY)
    attr = permutation_attribution(model, rows[300:], seed=1)
    assert attr["f0"] > 0 and attr["f1"] > 0
    assert attr["noise"] <= attr["f0"] / 5


def test_noise_feature_eliminated_across_seeds():
    # L1 keeps the model from leaning on the noise column at all, so its
    # permutation attribution lands at <= 0 and the loop drops it.
    dropped = 0
    for seed in range(12):
        rows = noisy_rows(100 + seed)
        spec = ClassifierSpec(Algorithm.LOGISTIC_REGRESSION,
                              {"penalty": "l1", "alpha": 0.05}, seed=seed)
        model = feature_eliminate(spec, rows[:300], rows[300:], NOISY)
        if "noise" not in model.selected_features:
            dropped += 1
    assert dropped >= 11  # elimination succeeds with probability >= ~0.95


def test_informative_fixture_terminates_with_full_set():
    # Two strong independent features and nothing else: the first pass
    # finds no non-positive attribution and stops immediately.
    rows, _x, _y = separable_rows(n=260, seed=26, noise=0.02)
    spec = ClassifierSpec(Algorithm.DECISION_TREE, {"max_depth": 6}, seed=0)
    model = feature_eliminate(spec, rows[:200], rows[200:], NAMES2)
    assert model.selected_features == NAMES2


def test_elimination_never_returns_empty_feature_set():
    # Pure noise everywhere: attributions hover at zero, and the loop must
    # still terminate with at least one feature.
    rng = np.random.default_rng(27)
    x = rng.normal(size=(120, 4))
    y = rng.integers(0, 3, 120)
    names = ("a", "b", "c", "d")
    rows = rows_from_xy(x, y, names)
    spec = ClassifierSpec(Algorithm.DECISION_TREE, {"max_depth": 3}, seed=0)
    model = feature_eliminate(spec, rows[:90], rows[90:], names)
    assert 1 <= len(model.selected_features) <= 4


def test_empty_validation_window_rejected():
    rows, _x, _y = separable_rows(n=60, seed=28)
    spec = ClassifierSpec(Algorithm.DECISION_TREE, seed=0)
    with pytest.raises(ProtocolError):
        feature_eliminate(spec, rows, [], NAMES2)
    model = fit(spec, rows, NAMES2)
    with pytest.raises(ProtocolError):
        permutation_attribution(model, [])


def test_returned_model_is_best_validation_iteration():
    rows = noisy_rows(29)
    spec = ClassifierSpec(Algorithm.LOGISTIC_REGRESSION, seed=3)
    model = feature_eliminate(spec, rows[:300], rows[300:], NOISY)
    best_acc = accuracy_on(model, rows[300:])
    full = fit(spec, rows[:300], NOISY)
    assert best_acc >= accuracy_on(full, rows[300:]) - 1e-12
