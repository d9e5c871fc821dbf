"""Voting and stacking ensembles over the single-model zoo.

Default membership is logistic regression, random forest, gradient
boosting, KNN and decision tree; per-member hyperparameters ride in the
ensemble spec under ``members``.
"""

import numpy as np

from ..errors import DegenerateFitError
from .base import N_CLASSES, Algorithm, ClassifierSpec
from .linear import LogisticRegressionModel

DEFAULT_MEMBERS = (
    Algorithm.LOGISTIC_REGRESSION,
    Algorithm.RANDOM_FOREST,
    Algorithm.GRADIENT_BOOSTING,
    Algorithm.KNN,
    Algorithm.DECISION_TREE,
)

STACKING_FOLDS = 3


def _member_specs(hyper: dict, seed: int) -> list[ClassifierSpec]:
    members = hyper.get("members")
    if members is None:
        members = {algo.value: {} for algo in DEFAULT_MEMBERS}
    seeds = np.random.SeedSequence(seed).spawn(len(members))
    return [
        ClassifierSpec(algorithm=Algorithm(name),
                       hyperparameters=dict(params),
                       seed=int(s.generate_state(1)[0]))
        for (name, params), s in zip(members.items(), seeds)
    ]


def _fit_members(specs: list[ClassifierSpec], x: np.ndarray, y: np.ndarray) -> list:
    from .registry import build_impl
    fitted = []
    for spec in specs:
        impl = build_impl(spec)
        impl.fit(x, y)
        fitted.append(impl)
    return fitted


class VotingModel:
    """Soft voting averages member triples; hard voting takes the
    majority of member picks and emits a degenerate triple for the
    winner, falling back to the soft average on count ties."""

    def __init__(self, hard: bool, members: dict | None = None, seed: int = 0):
        self.hard = hard
        self.seed = seed
        self.member_specs_ = _member_specs({"members": members} if members else {}, seed)
        self.members_: list = []

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        self.members_ = _fit_members(self.member_specs_, x, y)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        probas = np.stack([m.predict_proba(x) for m in self.members_])
        soft = probas.mean(axis=0)
        if not self.hard:
            return soft
        out = np.empty_like(soft)
        picks = probas.argmax(axis=2)  # (members, rows); argmax ties break in class order
        for i in range(x.shape[0]):
            votes = np.bincount(picks[:, i], minlength=N_CLASSES)
            top = votes.max()
            winners = np.flatnonzero(votes == top)
            if len(winners) == 1:
                out[i] = 0.0
                out[i, winners[0]] = 1.0
            else:
                out[i] = soft[i]
        return out

    def get_state(self) -> dict:
        return {
            "member_specs": [
                {"algorithm": s.algorithm.value, "hyperparameters": s.hyperparameters,
                 "seed": s.seed}
                for s in self.member_specs_
            ],
            "members": [m.get_state() for m in self.members_],
        }

    def set_state(self, state: dict) -> None:
        from .registry import impl_from_state
        self.member_specs_ = [
            ClassifierSpec(algorithm=Algorithm(s["algorithm"]),
                           hyperparameters=s["hyperparameters"], seed=s["seed"])
            for s in state["member_specs"]
        ]
        self.members_ = [impl_from_state(spec, member_state)
                         for spec, member_state in zip(self.member_specs_, state["members"])]


class StackingModel:
    """Members feed a logistic-regression final estimator trained on
    out-of-fold member confidences over chronological contiguous folds."""

    def __init__(self, members: dict | None = None, seed: int = 0):
        self.seed = seed
        self.member_specs_ = _member_specs({"members": members} if members else {}, seed)
        self.members_: list = []
        self.final_: LogisticRegressionModel | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> None:
        n = x.shape[0]
        bounds = np.linspace(0, n, STACKING_FOLDS + 1).astype(int)
        meta_rows, meta_labels = [], []
        for k in range(STACKING_FOLDS):
            held = np.arange(bounds[k], bounds[k + 1])
            rest = np.concatenate([np.arange(0, bounds[k]), np.arange(bounds[k + 1], n)])
            if held.size == 0 or np.unique(y[rest]).size < 2:
                continue
            try:
                members = _fit_members(self.member_specs_, x[rest], y[rest])
            except DegenerateFitError:
                continue
            stacked = np.hstack([m.predict_proba(x[held]) for m in members])
            meta_rows.append(stacked)
            meta_labels.append(y[held])
        if not meta_rows:
            raise DegenerateFitError("no usable stacking folds")
        meta_x = np.vstack(meta_rows)
        meta_y = np.concatenate(meta_labels)
        if np.unique(meta_y).size < 2:
            raise DegenerateFitError("stacked rows carry a single label")
        self.final_ = LogisticRegressionModel(penalty="l2", seed=self.seed)
        self.final_.fit(meta_x, meta_y)
        self.members_ = _fit_members(self.member_specs_, x, y)

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        stacked = np.hstack([m.predict_proba(x) for m in self.members_])
        return self.final_.predict_proba(stacked)

    def get_state(self) -> dict:
        return {
            "member_specs": [
                {"algorithm": s.algorithm.value, "hyperparameters": s.hyperparameters,
                 "seed": s.seed}
                for s in self.member_specs_
            ],
            "members": [m.get_state() for m in self.members_],
            "final": self.final_.get_state(),
        }

    def set_state(self, state: dict) -> None:
        from .registry import impl_from_state
        self.member_specs_ = [
            ClassifierSpec(algorithm=Algorithm(s["algorithm"]),
                           hyperparameters=s["hyperparameters"], seed=s["seed"])
            for s in state["member_specs"]
        ]
        self.members_ = [impl_from_state(spec, member_state)
                         for spec, member_state in zip(self.member_specs_, state["members"])]
        self.final_ = LogisticRegressionModel()
        self.final_.set_state(state["final"])
