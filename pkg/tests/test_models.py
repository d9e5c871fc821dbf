import numpy as np
import pytest

from matchcast.errors import DegenerateFitError, InputError, SpecError
from matchcast.ingest import RESULT_ORDER, Result
from matchcast.models import (Algorithm, ClassifierSpec, fit, load_model,
                              save_model)
from matchcast.models.base import accuracy_on, argmax_result, rows_to_xy
from matchcast.models.boosting import multinomial_deviance
from matchcast.models.ensemble import VotingModel
from tests.conftest import rows_from_xy

NAMES2 = ("f0", "f1")


def separable_rows(n=240, seed=0, noise=0.15, names=NAMES2):
    """Three classes separated by known linear scores in two features."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=(n, len(names)))
    scores = np.stack([x[:, 0], x[:, 1], -x[:, 0] - x[:, 1]], axis=1)
    y = np.argmax(scores + rng.normal(0, noise, scores.shape), axis=1)
    return rows_from_xy(x, y, names), x, y


ALL_ALGORITHMS = [
    ClassifierSpec(Algorithm.LOGISTIC_REGRESSION, seed=1),
    ClassifierSpec(Algorithm.DECISION_TREE, {"max_depth": 6}, seed=1),
    ClassifierSpec(Algorithm.RANDOM_FOREST, {"n_trees": 12, "max_depth": 6}, seed=1),
    ClassifierSpec(Algorithm.GRADIENT_BOOSTING, {"n_rounds": 15}, seed=1),
    ClassifierSpec(Algorithm.KNN, {"n_neighbors": 5}, seed=1),
    ClassifierSpec(Algorithm.VOTING_SOFT, {"members": {
        "logistic_regression": {}, "decision_tree": {"max_depth": 4}}}, seed=1),
    ClassifierSpec(Algorithm.VOTING_HARD, {"members": {
        "logistic_regression": {}, "decision_tree": {"max_depth": 4},
        "knn": {"n_neighbors": 5}}}, seed=1),
    ClassifierSpec(Algorithm.STACKING, {"members": {
        "logistic_regression": {}, "knn": {"n_neighbors": 5}}}, seed=1),
    ClassifierSpec(Algorithm.BASELINE_UNIFORM, seed=1),
    ClassifierSpec(Algorithm.BASELINE_STRATIFIED, seed=1),
]


@pytest.mark.parametrize("spec", ALL_ALGORITHMS, ids=lambda s: s.algorithm.value)
def test_confidence_triples_are_distributions(spec):
    rows, x, _y = separable_rows(seed=2)
    model = fit(spec, rows[:200], NAMES2)
    probas = model.predict_proba_matrix(x[200:])
    assert np.all(probas >= -1e-12)
    assert probas.sum(axis=1) == pytest.approx(np.ones(len(probas)), abs=1e-9)


@pytest.mark.parametrize("spec", ALL_ALGORITHMS, ids=lambda s: s.algorithm.value)
def test_identical_fits_serialize_identically(tmp_path, spec):
    rows, _x, _y = separable_rows(seed=3, n=120)
    a = fit(spec, rows, NAMES2)
    b = fit(spec, rows, NAMES2)
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    save_model(a, pa)
    save_model(b, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_saved_model_round_trips(tmp_path):
    rows, x, _y = separable_rows(seed=4, n=120)
    model = fit(ClassifierSpec(Algorithm.GRADIENT_BOOSTING, {"n_rounds": 10}, seed=5),
                rows, NAMES2)
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.selected_features == model.selected_features
    assert loaded.predict_proba_matrix(x[:20]) == pytest.approx(
        model.predict_proba_matrix(x[:20]), abs=1e-12)


def test_single_label_window_rejected():
    rows = rows_from_xy(np.random.default_rng(0).normal(size=(30, 2)),
                        np.zeros(30, dtype=int), NAMES2)
    with pytest.raises(DegenerateFitError):
        fit(ClassifierSpec(Algorithm.DECISION_TREE), rows, NAMES2)


def test_too_few_rows_rejected():
    rows, _x, _y = separable_rows(n=8)
    with pytest.raises(DegenerateFitError):
        fit(ClassifierSpec(Algorithm.KNN), rows[:8], NAMES2)


def test_unknown_hyperparameter_rejected():
    rows, _x, _y = separable_rows(n=40)
    with pytest.raises(SpecError):
        fit(ClassifierSpec(Algorithm.KNN, {"neighbours": 5}), rows, NAMES2)
    with pytest.raises(SpecError):
        fit(ClassifierSpec(Algorithm.DECISION_TREE, {"criterion": "mse"}), rows, NAMES2)
    with pytest.raises(SpecError):
        fit(ClassifierSpec(Algorithm.GRADIENT_BOOSTING, {"learning_rate": -1}),
            rows, NAMES2)


def test_missing_feature_named_in_error():
    rows, _x, _y = separable_rows(n=40)
    model = fit(ClassifierSpec(Algorithm.KNN, {"n_neighbors": 3}), rows, NAMES2)
    orphan = rows_from_xy([[0.1]], [0], ("f0",))[0]
    with pytest.raises(InputError, match="f1"):
        model.predict(orphan)


# ---------------------------------------------------------------------------
# Logistic regression


def test_logistic_regression_separates_plane_fixture():
    rows, _x, _y = separable_rows(n=400, seed=6, noise=0.05)
    model = fit(ClassifierSpec(Algorithm.LOGISTIC_REGRESSION, seed=0), rows[:300], NAMES2)
    assert accuracy_on(model, rows[300:]) >= 0.95


def test_logistic_gradient_matches_central_differences():
    from matchcast.models.linear import LogisticRegressionModel
    _rows, x, y = separable_rows(n=5, seed=7, noise=0.3)
    impl = LogisticRegressionModel(penalty="l2", class_weight=(1, 2, 1))
    impl.fit(x, y)
    w_opt = impl.coef_.ravel()
    rng = np.random.default_rng(8)
    points = [np.zeros_like(w_opt), rng.normal(0, 0.5, w_opt.shape), w_opt]
    h = 1e-6
    for w in points:
        _, grad = impl.objective(w, x, y)
        fd = np.empty_like(grad)
        for j in range(len(w)):
            up, down = w.copy(), w.copy()
            up[j] += h
            down[j] -= h
            fd[j] = (impl.objective(up, x, y)[0] - impl.objective(down, x, y)[0]) / (2 * h)
        scale = max(np.abs(fd).max(), 1e-2)
        assert np.abs(grad - fd).max() <= 1e-4 * scale


def test_l1_penalty_sparsifies_noise_features():
    rng = np.random.default_rng(9)
    rows, x, y = separable_rows(n=300, seed=9, noise=0.05,
                                names=("f0", "f1", "junk0", "junk1"))
    # replace the informative plane with noise on the junk columns
    for row in rows:
        row.values["junk0"] = float(rng.normal())
        row.values["junk1"] = float(rng.normal())
    strong = fit(ClassifierSpec(Algorithm.LOGISTIC_REGRESSION,
                                {"penalty": "l1", "alpha": 0.2}, seed=0),
                 rows, ("f0", "f1", "junk0", "junk1"))
    coefs = np.abs(strong.impl.coef_[:-1])
    assert coefs[2:].max() < coefs[:2].max()


# ---------------------------------------------------------------------------
# Trees, forests, boosting, neighbors


def test_tree_interpolates_distinct_rows():
    rng = np.random.default_rng(10)
    x = rng.uniform(size=(30, 2))
    y = rng.integers(0, 3, 30)
    y[:3] = [0, 1, 2]
    rows = rows_from_xy(x, y, NAMES2)
    model = fit(ClassifierSpec(Algorithm.DECISION_TREE, {"max_depth": 12}, seed=0),
                rows, NAMES2)
    assert accuracy_on(model, rows) == 1.0


def test_forest_with_one_plain_tree_equals_decision_tree():
    rows, x, _y = separable_rows(n=150, seed=11)
    tree = fit(ClassifierSpec(Algorithm.DECISION_TREE,
                              {"max_depth": 6, "min_samples_leaf": 2}, seed=3),
               rows, NAMES2)
    forest = fit(ClassifierSpec(Algorithm.RANDOM_FOREST,
                                {"n_trees": 1, "bootstrap": False, "max_depth": 6,
                                 "min_samples_leaf": 2, "max_features": 2}, seed=3),
                 rows, NAMES2)
    assert forest.predict_proba_matrix(x) == pytest.approx(
        tree.predict_proba_matrix(x), abs=1e-15)


def test_boosting_training_loss_non_increasing():
    rows, _x, _y = separable_rows(n=200, seed=12)
    model = fit(ClassifierSpec(Algorithm.GRADIENT_BOOSTING,
                               {"n_rounds": 40, "learning_rate": 0.1,
                                "subsample": 1.0}, seed=0), rows, NAMES2)
    losses = model.impl.train_losses_
    assert len(losses) == 41
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_boosting_loss_recomputable_from_scores():
    rows, x, y = separable_rows(n=120, seed=13)
    model = fit(ClassifierSpec(Algorithm.GRADIENT_BOOSTING, {"n_rounds": 8}, seed=0),
                rows, NAMES2)
    scores = model.impl.decision_scores(x)
    assert multinomial_deviance(scores, y) == pytest.approx(
        model.impl.train_losses_[-1], abs=1e-12)


def test_knn_unanimous_neighborhood_is_one_hot():
    x = np.array([[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1], [0.05, 0.05],
                  [5.0, 5.0], [5.1, 5.0], [5.0, 5.1], [9.0, 9.0], [9.1, 9.0]])
    y = np.array([0, 0, 0, 0, 0, 1, 1, 1, 2, 2])
    rows = rows_from_xy(x, y, NAMES2)
    model = fit(ClassifierSpec(Algorithm.KNN, {"n_neighbors": 5}, seed=0),
                rows, NAMES2)
    probe = rows_from_xy([[0.02, 0.02]], [0], NAMES2)[0]
    outcome = model.predict(probe)
    assert outcome.confidences == (1.0, 0.0, 0.0)
    assert outcome.predicted is Result.HOME_WIN


# ---------------------------------------------------------------------------
# Voting and stacking


class _StubMember:
    def __init__(self, triple):
        self.triple = np.asarray(triple)

    def predict_proba(self, x):
        return np.tile(self.triple, (x.shape[0], 1))


def test_soft_vote_mean_and_tie_break():
    model = VotingModel(hard=False)
    model.members_ = [_StubMember((0.6, 0.2, 0.2)), _StubMember((0.2, 0.6, 0.2))]
    proba = model.predict_proba(np.zeros((1, 2)))[0]
    assert proba == pytest.approx((0.4, 0.4, 0.2), abs=1e-12)
    assert argmax_result(proba) is Result.HOME_WIN  # tie-break Home > Draw


def test_hard_vote_majority_is_degenerate_triple():
    model = VotingModel(hard=True)
    model.members_ = [_StubMember((0.6, 0.3, 0.1)), _StubMember((0.5, 0.4, 0.1)),
                      _StubMember((0.1, 0.8, 0.1))]
    proba = model.predict_proba(np.zeros((1, 2)))[0]
    assert tuple(proba) == (1.0, 0.0, 0.0)


def test_hard_vote_tie_falls_back_to_soft_average():
    model = VotingModel(hard=True)
    model.members_ = [_StubMember((0.7, 0.2, 0.1)), _StubMember((0.1, 0.6, 0.3))]
    proba = model.predict_proba(np.zeros((1, 2)))[0]
    assert proba == pytest.approx((0.4, 0.4, 0.2), abs=1e-12)


def test_ensembles_learn_the_separable_fixture():
    rows, _x, _y = separable_rows(n=300, seed=14, noise=0.05)
    for algorithm in (Algorithm.VOTING_SOFT, Algorithm.VOTING_HARD, Algorithm.STACKING):
        spec = ClassifierSpec(algorithm, {"members": {
            "logistic_regression": {}, "knn": {"n_neighbors": 7},
            "decision_tree": {"max_depth": 6}}}, seed=0)
        model = fit(spec, rows[:240], NAMES2)
        assert accuracy_on(model, rows[240:]) >= 0.8, algorithm


# ---------------------------------------------------------------------------
# Baselines


def test_uniform_baseline_long_run_frequencies():
    rng = np.random.default_rng(15)
    x = rng.normal(size=(10000, 2))
    y = rng.integers(0, 3, 10000)
    rows = rows_from_xy(x, y, NAMES2)
    model = fit(ClassifierSpec(Algorithm.BASELINE_UNIFORM, seed=2), rows[:100], NAMES2)
    picks = model.predict_proba_matrix(x).argmax(axis=1)
    freqs = np.bincount(picks, minlength=3) / len(picks)
    assert freqs == pytest.approx([1 / 3] * 3, abs=0.02)


def test_stratified_baseline_follows_training_distribution():
    rng = np.random.default_rng(16)
    x = rng.normal(size=(9000, 2))
    y_train = np.repeat([0, 1, 2], [60, 25, 15])
    rows = rows_from_xy(x[:100], y_train, NAMES2)
    model = fit(ClassifierSpec(Algorithm.BASELINE_STRATIFIED, seed=3), rows, NAMES2)
    picks = model.predict_proba_matrix(x).argmax(axis=1)
    freqs = np.bincount(picks, minlength=3) / len(picks)
    assert freqs == pytest.approx([0.60, 0.25, 0.15], abs=0.02)


def test_baseline_prediction_is_order_independent():
    rows, x, _y = separable_rows(n=50, seed=17)
    model = fit(ClassifierSpec(Algorithm.BASELINE_UNIFORM, seed=4), rows, NAMES2)
    forward = model.predict_proba_matrix(x)
    backward = model.predict_proba_matrix(x[::-1])[::-1]
    assert forward == pytest.approx(backward, abs=0)


# ---------------------------------------------------------------------------
# Leakage guard


def test_label_shuffle_trains_to_chance():
    rows, x, y = separable_rows(n=300, seed=18, noise=0.05)
    rng = np.random.default_rng(19)
    shuffled = rows_from_xy(x[:200], rng.permutation(y[:200]), NAMES2)
    majority = np.bincount(y[200:]).max() / 100
    for algorithm, hyper in ((Algorithm.DECISION_TREE, {"max_depth": 6}),
                             (Algorithm.LOGISTIC_REGRESSION, {})):
        model = fit(ClassifierSpec(algorithm, hyper, seed=0), shuffled, NAMES2)
        acc = accuracy_on(model, rows[200:])
        assert abs(acc - majority) <= 0.10 + 1e-9, algorithm
