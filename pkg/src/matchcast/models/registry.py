"""Construction of model implementations from classifier specs."""

from ..errors import SpecError
from .base import Algorithm, ClassifierSpec
from .baselines import BaselineStratifiedModel, BaselineUniformModel
from .boosting import GradientBoostingModel
from .ensemble import StackingModel, VotingModel
from .forest import RandomForestModel
from .linear import LogisticRegressionModel
from .neighbors import KnnModel
from .tree import DecisionTreeModel


def build_impl(spec: ClassifierSpec):
    hyper = dict(spec.hyperparameters)
    algorithm = spec.algorithm
    if algorithm is Algorithm.LOGISTIC_REGRESSION:
        return LogisticRegressionModel(**hyper, seed=spec.seed)
    if algorithm is Algorithm.DECISION_TREE:
        return DecisionTreeModel(**hyper, seed=spec.seed)
    if algorithm is Algorithm.RANDOM_FOREST:
        return RandomForestModel(**hyper, seed=spec.seed)
    if algorithm is Algorithm.GRADIENT_BOOSTING:
        return GradientBoostingModel(**hyper, seed=spec.seed)
    if algorithm is Algorithm.KNN:
        return KnnModel(**hyper, seed=spec.seed)
    if algorithm is Algorithm.VOTING_SOFT:
        return VotingModel(hard=False, members=hyper.get("members"), seed=spec.seed)
    if algorithm is Algorithm.VOTING_HARD:
        return VotingModel(hard=True, members=hyper.get("members"), seed=spec.seed)
    if algorithm is Algorithm.STACKING:
        return StackingModel(members=hyper.get("members"), seed=spec.seed)
    if algorithm is Algorithm.BASELINE_UNIFORM:
        return BaselineUniformModel(seed=spec.seed)
    if algorithm is Algorithm.BASELINE_STRATIFIED:
        return BaselineStratifiedModel(seed=spec.seed)
    raise SpecError(f"unknown algorithm {algorithm!r}")


def impl_from_state(spec: ClassifierSpec, state: dict):
    impl = build_impl(spec)
    impl.set_state(state)
    return impl
