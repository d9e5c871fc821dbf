"""Expanding-window protocol per match type, metrics and rank tables.

Windows advance through each type's chronological match sequence in
steps of the test size; training uses everything earlier within a
trailing season horizon, with a same-sized validation span immediately
before the test span. Accuracy, weighted precision, macro recall and F1
are computed per window, and algorithms are ranked by accuracy within
each window.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import DegenerateFitError, ProtocolError, SpecError
from .features import FEATURE_COLUMNS, FeatureVector
from .ingest import RESULT_ORDER
from .kelly import MatchType
from .models import (Algorithm, ClassifierSpec, PredictionOutcome,
                     base_algorithm, feature_eliminate, fit, grid_for,
                     random_search)

STAGE_VERSION = 1

log = logging.getLogger(__name__)

#: Algorithms that skip hyperparameter search and feature elimination and
#: absorb the validation span into training.
NO_VALIDATION = {Algorithm.VOTING_SOFT.value, Algorithm.VOTING_HARD.value,
                 Algorithm.STACKING.value, Algorithm.BASELINE_UNIFORM.value,
                 Algorithm.BASELINE_STRATIFIED.value}

ENSEMBLES = {Algorithm.VOTING_SOFT.value, Algorithm.VOTING_HARD.value,
             Algorithm.STACKING.value}

#: Confidence histogram bin edges (max confidence of a triple is >= 1/3).
CONFIDENCE_BINS = ((1 / 3, 0.4), (0.4, 0.5), (0.5, 0.6), (0.6, 0.7), (0.7, 1.0))

MIN_TAIL = 20  # a shorter leftover test span merges into its predecessor


@dataclass(frozen=True)
class Window:
    index: int
    train: range
    validation: range
    test: range


@dataclass(frozen=True)
class WindowPlan:
    test_size: int
    validation: bool
    windows: tuple[Window, ...]


def plan_windows(season_ids: list[str], test_size: int, validation: bool,
                 horizon_seasons: int | None = 2) -> WindowPlan:
    """Plan disjoint contiguous train/validation/test spans.

    ``season_ids`` is the per-match season label sequence of one type,
    already chronological. Training reaches back at most
    ``horizon_seasons`` distinct seasons (None for unlimited).
    """
    if not 20 <= test_size <= 30:
        raise ProtocolError(f"test_size must be in [20, 30], got {test_size}")
    n = len(season_ids)
    v = test_size if validation else 0
    if n < test_size + v + 10:
        raise ProtocolError(
            f"need at least {test_size + v + 10} matches, got {n}")

    starts = list(range(test_size + v, n, test_size))
    ends = [min(s + test_size, n) for s in starts]
    if len(starts) > 1 and ends[-1] - starts[-1] < MIN_TAIL:
        ends[-2] = ends[-1]
        starts.pop()
        ends.pop()

    windows = []
    for idx, (test_start, test_end) in enumerate(zip(starts, ends)):
        val_start = test_start - v
        train_start = _horizon_start(season_ids, val_start, horizon_seasons)
        windows.append(Window(
            index=idx,
            train=range(train_start, val_start),
            validation=range(val_start, test_start),
            test=range(test_start, test_end),
        ))
    return WindowPlan(test_size=test_size, validation=validation,
                      windows=tuple(windows))


def _horizon_start(season_ids, before: int, horizon: int | None) -> int:
    if horizon is None:
        return 0
    seen: list[str] = []
    for sid in season_ids[:before]:
        if not seen or seen[-1] != sid:
            seen.append(sid)
    keep = set(seen[-horizon:])
    for i in range(before - 1, -1, -1):
        if season_ids[i] not in keep:
            return i + 1
    return 0


# ---------------------------------------------------------------------------
# Metrics

@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    weighted_precision: float
    macro_recall: float
    f1: float
    confusion: tuple[tuple[int, ...], ...]  # rows actual, cols predicted (H, D, A)
    window_id: str = ""
    model_id: str = ""


def compute_metrics(outcomes: list[PredictionOutcome],
                    window_id: str = "", model_id: str = "") -> MetricsReport:
    """Accuracy, support-weighted precision, macro recall and their F1.

    Classes absent from the sample contribute zero recall (flagged in
    the log); a class never predicted contributes zero precision.
    """
    if not outcomes:
        raise ValueError("no outcomes to score")
    confusion = np.zeros((3, 3), dtype=np.int64)
    for o in outcomes:
        confusion[o.actual.index, o.predicted.index] += 1
    total = confusion.sum()
    accuracy = float(np.trace(confusion) / total)

    support = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    precisions = np.zeros(3)
    recalls = np.zeros(3)
    for c in range(3):
        if predicted[c]:
            precisions[c] = confusion[c, c] / predicted[c]
        if support[c]:
            recalls[c] = confusion[c, c] / support[c]
        else:
            log.info("class %s absent from sample %s/%s",
                     RESULT_ORDER[c].value, window_id, model_id)
    weighted_precision = float((precisions * support).sum() / total)
    macro_recall = float(recalls.mean())
    denom = weighted_precision + macro_recall
    f1 = 2.0 * weighted_precision * macro_recall / denom if denom else 0.0
    return MetricsReport(
        accuracy=accuracy,
        weighted_precision=weighted_precision,
        macro_recall=macro_recall,
        f1=float(f1),
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        window_id=window_id,
        model_id=model_id,
    )


def rank_algorithms(accuracies: dict[str, list[float]]) -> dict[str, float]:
    """Mean accuracy rank per algorithm (1 = best; ties share the mean)."""
    lengths = {len(v) for v in accuracies.values()}
    if len(lengths) > 1:
        raise ProtocolError("algorithms scored on differing window counts")
    (n_windows,) = lengths or {0}
    if n_windows == 0:
        raise ProtocolError("no windows to rank")
    names = list(accuracies)
    table = np.array([accuracies[name] for name in names])
    ranks = np.array([rankdata(-table[:, w], method="average")
                      for w in range(n_windows)]).T
    return {name: float(r) for name, r in zip(names, ranks.mean(axis=1))}


def confidence_histogram(outcomes: list[PredictionOutcome]) -> dict[str, int]:
    """Prediction counts per max-confidence bin (a partition)."""
    counts = {f"{lo:.2f}-{hi:.2f}": 0 for lo, hi in CONFIDENCE_BINS}
    for o in outcomes:
        c = o.confidence
        for (lo, hi), key in zip(CONFIDENCE_BINS, counts):
            if (lo <= c < hi) or (hi == 1.0 and lo <= c <= 1.0):
                counts[key] += 1
                break
    return counts


# ---------------------------------------------------------------------------
# Protocol driver

TYPE_ALL = "All"


@dataclass
class ProtocolConfig:
    test_size: int = 25
    horizon_seasons: int | None = 2
    n_draws: int = 25
    elimination_rounds: int = 10
    member_algorithms: tuple[str, ...] = (
        Algorithm.LOGISTIC_REGRESSION.value, Algorithm.RANDOM_FOREST.value,
        Algorithm.GRADIENT_BOOSTING.value, Algorithm.KNN.value,
        Algorithm.DECISION_TREE.value)


@dataclass
class ProtocolResult:
    types: tuple[str, ...]
    roster: tuple[str, ...]
    outcomes: dict[tuple[str, str, int], list[PredictionOutcome]] = field(default_factory=dict)
    metrics: dict[tuple[str, str, int], MetricsReport] = field(default_factory=dict)
    ranks: dict[str, dict[str, float]] = field(default_factory=dict)
    histograms: dict[tuple[str, str], dict[str, int]] = field(default_factory=dict)
    plans: dict[str, WindowPlan] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def outcomes_for(self, type_label: str, roster_name: str) -> list[PredictionOutcome]:
        merged: list[PredictionOutcome] = []
        for (t, a, _w), outs in sorted(self.outcomes.items(), key=lambda kv: kv[0]):
            if t == type_label and a == roster_name:
                merged.extend(outs)
        return merged

    def best_algorithm(self, type_label: str) -> str:
        """Best mean accuracy over windows (the headline 'best model')."""
        scores: dict[str, list[float]] = {}
        for (t, a, _w), report in self.metrics.items():
            if t == type_label:
                scores.setdefault(a, []).append(report.accuracy)
        if not scores:
            raise ProtocolError(f"no metrics for type {type_label}")
        return max(scores, key=lambda a: (float(np.mean(scores[a])), a))


def _window_seed(base_seed: int, type_slot: int, window_idx: int, slot: int) -> int:
    seq = np.random.SeedSequence(entropy=base_seed,
                                 spawn_key=(type_slot, window_idx, slot))
    return int(seq.generate_state(1)[0])


def run_protocol(rows: list[FeatureVector],
                 types_by_key: dict[tuple[str, str, str, str], MatchType],
                 types: tuple[str, ...],
                 roster: tuple[str, ...],
                 seed: int,
                 cfg: ProtocolConfig | None = None) -> ProtocolResult:
    """Search, eliminate, fit and predict per type, algorithm and window.

    All algorithms are evaluated on the same validation-bearing window
    plan so rank tables compare identical test spans; algorithms that do
    not use a validation set absorb it into training. A failing window
    is skipped with a diagnostic, never aborting the whole run.
    """
    cfg = cfg or ProtocolConfig()
    result = ProtocolResult(types=tuple(types), roster=tuple(roster))

    for type_label in types:
        type_slot = hash_slot(type_label)
        if type_label == TYPE_ALL:
            trows = list(rows)
        else:
            trows = [r for r in rows if types_by_key[r.key].value == type_label]
        try:
            plan = plan_windows([r.season_id for r in trows], cfg.test_size,
                                validation=True,
                                horizon_seasons=cfg.horizon_seasons)
        except ProtocolError as exc:
            result.diagnostics.append(f"{type_label}: {exc}")
            log.warning("skipping %s: %s", type_label, exc)
            continue
        result.plans[type_label] = plan

        for window in plan.windows:
            train = [trows[i] for i in window.train]
            val = [trows[i] for i in window.validation]
            test = [trows[i] for i in window.test]
            window_id = f"{type_label}-w{window.index}"
            specs_cache: dict[str, ClassifierSpec] = {}

            for roster_name in roster:
                try:
                    model = _train_window(roster_name, train, val, specs_cache,
                                          seed, type_slot, window.index, cfg)
                    outcomes = model.predict_rows(test)
                except (DegenerateFitError, ProtocolError, SpecError) as exc:
                    result.diagnostics.append(f"{window_id}/{roster_name}: {exc}")
                    log.warning("window %s %s failed: %s", window_id, roster_name, exc)
                    continue
                key = (type_label, roster_name, window.index)
                result.outcomes[key] = outcomes
                result.metrics[key] = compute_metrics(outcomes, window_id, roster_name)

        _finalize_type(result, type_label, plan, roster)
    return result


def _train_window(roster_name, train, val, specs_cache, seed,
                  type_slot, window_idx, cfg: ProtocolConfig):
    algorithm = base_algorithm(roster_name)
    fit_seed = _window_seed(seed, type_slot, window_idx, hash_slot(roster_name))

    if roster_name in ENSEMBLES:
        members = {}
        for member in cfg.member_algorithms:
            spec = _search_member(member, train, val, specs_cache, seed,
                                  type_slot, window_idx, cfg)
            members[base_algorithm(member).value] = spec.hyperparameters
        spec = ClassifierSpec(algorithm=algorithm,
                              hyperparameters={"members": members}, seed=fit_seed)
        return fit(spec, train + val, FEATURE_COLUMNS)

    if algorithm.value in NO_VALIDATION:  # baselines
        spec = ClassifierSpec(algorithm=algorithm, seed=fit_seed)
        return fit(spec, train + val, FEATURE_COLUMNS)

    best = _search_member(roster_name, train, val, specs_cache, seed,
                          type_slot, window_idx, cfg)
    return feature_eliminate(best, train, val, FEATURE_COLUMNS,
                             rounds=cfg.elimination_rounds)


def _search_member(roster_name, train, val, specs_cache, seed,
                   type_slot, window_idx, cfg: ProtocolConfig) -> ClassifierSpec:
    if roster_name in specs_cache:
        return specs_cache[roster_name]
    grid = grid_for(roster_name, len(train), len(FEATURE_COLUMNS))
    search_seed = _window_seed(seed, type_slot, window_idx, hash_slot(roster_name))
    best, _draws = random_search(roster_name, grid, cfg.n_draws, train, val,
                                 search_seed, FEATURE_COLUMNS)
    specs_cache[roster_name] = best
    return best


def hash_slot(name: str) -> int:
    # Stable small integer per roster name for seed derivation.
    return sum(name.encode()) % 1009


def _finalize_type(result: ProtocolResult, type_label: str,
                   plan: WindowPlan, roster) -> None:
    complete_windows = [
        w.index for w in plan.windows
        if all((type_label, a, w.index) in result.metrics for a in roster)
    ]
    if complete_windows:
        accs = {a: [result.metrics[(type_label, a, w)].accuracy
                    for w in complete_windows] for a in roster}
        result.ranks[type_label] = rank_algorithms(accs)
    elif type_label in result.plans:
        result.diagnostics.append(f"{type_label}: no window completed for all algorithms")
    for a in roster:
        outs = result.outcomes_for(type_label, a)
        if outs:
            result.histograms[(type_label, a)] = confidence_histogram(outs)
