"""Engineered feature rows for upcoming matches.

One row per match, assembled strictly from matches played on earlier
dates: rating snapshots, rolling six-match statistics, market-implied
probabilities and their one-dimensional compressions. Rebuilding any row
from the dataset truncated at its date reproduces it bit for bit.
"""

import csv
import logging
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .ingest import MatchRecord, Result
from .kelly import f99
from .ratings import (STREAK_WINDOW, EloConfig, DEFAULT_ELO, RatingBook,
                      elo_probabilities, streak, weighted_streak)

STAGE_VERSION = 1

log = logging.getLogger(__name__)

#: Stable column order of the engineered feature table.
FEATURE_COLUMNS = (
    "AvgGoalDiff", "TotalGoalDiff",
    "HomeELO", "AwayELO", "ELOsta", "ELOHomeW", "ELOAwayW", "ELODraw", "one_ELO",
    "HomeHELO", "AwayHELO", "HELOSta", "ELOHHomeW", "ELOHAwayW", "ELOHDrawW", "one_HELO",
    "HomeTeamPoint", "AwayTeamPoint", "PointDiff",
    "AvgHOddPro", "AvgAOddPro", "AvgDOddPro", "one_Odd_Pro",
    "HomeOff", "HomeDef", "AwayOff", "AwayDef", "Offsta", "Defsta",
    "AvgShotSta", "AvgTargetSta", "ShotAccSta", "AvgCornerSta", "AvgFoulSta",
    "HomeHWin", "HomeHDraw", "AwayAWin", "AwayADraw",
    "HomeWin", "HomeDraw", "AwayWin", "AwayDraw",
    "LSHW", "LSHD", "LSAW", "LSAD",
    "Ysta", "Rsta",
    "StreakH", "StreakA", "WStreakH", "WStreakA",
)

#: Features constrained to [0, 1] by construction.
PERCENTAGE_COLUMNS = (
    "ELOHomeW", "ELOAwayW", "ELODraw", "ELOHHomeW", "ELOHAwayW", "ELOHDrawW",
    "AvgHOddPro", "AvgAOddPro", "AvgDOddPro",
    "HomeHWin", "HomeHDraw", "AwayAWin", "AwayADraw",
    "HomeWin", "HomeDraw", "AwayWin", "AwayDraw",
    "LSHW", "LSHD", "LSAW", "LSAD",
    "StreakH", "StreakA", "WStreakH", "WStreakA",
)


@dataclass(frozen=True)
class FeatureVector:
    season_id: str
    round_date: str  # ISO
    home_team: str
    away_team: str
    values: dict[str, float]
    label: Result

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.season_id, self.round_date, self.home_team, self.away_team)


# ---------------------------------------------------------------------------
# Principal component compression of probability triples

@dataclass(frozen=True)
class PcaModel:
    mean: tuple[float, ...]
    axis: tuple[float, ...]
    explained_variance_ratio: float


def _top_component(cov: np.ndarray) -> tuple[np.ndarray, float]:
    """Leading eigenvector/eigenvalue of a symmetric PSD matrix by power
    iteration with a deterministic start (basis fallbacks cover starts
    orthogonal to the leading direction)."""
    n = cov.shape[0]
    starts = [np.ones(n) / math.sqrt(n)] + [np.eye(n)[i] for i in range(n)]
    for v in starts:
        w = cov @ v
        if np.linalg.norm(w) <= 1e-300:
            continue
        for _ in range(500):
            w = cov @ v
            norm = np.linalg.norm(w)
            if norm <= 1e-300:
                break
            w = w / norm
            if np.linalg.norm(w - v) < 1e-14:
                v = w
                break
            v = w
        value = float(v @ cov @ v)
        return v, value
    return np.eye(n)[0], 0.0


def _sign_convention(axis: np.ndarray) -> np.ndarray:
    for component in axis:
        if abs(component) > 1e-12:
            return axis if component > 0 else -axis
    return axis


def _fit_from_moments(mean: np.ndarray, cov: np.ndarray) -> PcaModel:
    total = float(np.trace(cov))
    if total <= 1e-300:
        axis = np.zeros_like(mean)
        axis[0] = 1.0
        return PcaModel(mean=tuple(mean), axis=tuple(axis), explained_variance_ratio=0.0)
    axis, value = _top_component(cov)
    axis = _sign_convention(axis)
    ratio = min(1.0, max(0.0, value / total))
    return PcaModel(mean=tuple(mean), axis=tuple(axis), explained_variance_ratio=ratio)


def pca_fit(rows) -> PcaModel:
    """First principal component of mean-centered triples.

    Uses the unbiased covariance; the axis sign is fixed so its first
    nonzero component is positive. Zero-variance data falls back to the
    first basis axis with an explained-variance ratio of 0.
    """
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError("need at least two rows to fit")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (data.shape[0] - 1)
    return _fit_from_moments(mean, cov)


def pca_project(model: PcaModel, triple) -> float:
    """Signed coordinate of a point along the fitted component."""
    diff = np.asarray(triple, dtype=float) - np.asarray(model.mean)
    return float(diff @ np.asarray(model.axis))


class _RunningTriples:
    """Streaming mean/covariance over observed triples (for the expanding
    per-row PCA fits; O(1) per row)."""

    def __init__(self, dim: int = 3):
        self.n = 0
        self.total = np.zeros(dim)
        self.outer = np.zeros((dim, dim))

    def add(self, triple) -> None:
        x = np.asarray(triple, dtype=float)
        self.n += 1
        self.total += x
        self.outer += np.outer(x, x)

    def model(self) -> PcaModel | None:
        if self.n < 2:
            return None
        mean = self.total / self.n
        cov = (self.outer - self.n * np.outer(mean, mean)) / (self.n - 1)
        cov = (cov + cov.T) / 2.0
        return _fit_from_moments(mean, cov)


# ---------------------------------------------------------------------------
# Rolling per-team windows of raw match statistics

class _StatWindow:
    def __init__(self, size: int = STREAK_WINDOW):
        self.goal_diff: deque[int] = deque(maxlen=size)
        self.shots: deque[int] = deque(maxlen=size)
        self.on_target: deque[int] = deque(maxlen=size)
        self.corners: deque[int] = deque(maxlen=size)
        self.fouls: deque[int] = deque(maxlen=size)
        self.yellows: deque[int] = deque(maxlen=size)
        self.reds: deque[int] = deque(maxlen=size)

    def push(self, goal_diff, shots, on_target, corners, fouls, yellows, reds):
        self.goal_diff.append(goal_diff)
        self.shots.append(shots)
        self.on_target.append(on_target)
        self.corners.append(corners)
        self.fouls.append(fouls)
        self.yellows.append(yellows)
        self.reds.append(reds)

    @property
    def full(self) -> bool:
        return len(self.goal_diff) == self.goal_diff.maxlen

    def shot_accuracy(self) -> float:
        total_shots = sum(self.shots)
        return sum(self.on_target) / total_shots if total_shots else 0.0


def _two_value_std(x: float, y: float) -> float:
    # Population standard deviation of two numbers.
    return abs(x - y) / 2.0


def _pct(numer: int, denom: int) -> float:
    return numer / denom if denom else 0.0


# ---------------------------------------------------------------------------
# Feature assembly

@dataclass
class FeatureBuild:
    rows: list[FeatureVector]
    skipped: list[tuple[tuple[str, str, str, str], str]]


def build_features(matches: list[MatchRecord],
                   elo_cfg: EloConfig = DEFAULT_ELO,
                   streak_window: int = STREAK_WINDOW) -> FeatureBuild:
    """Assemble the feature catalogue over a chronological match list.

    Matches are processed in date groups: every row for a given date is
    derived from the state after all strictly earlier dates, so rows
    never see same-day or later matches. Matches without enough history
    (first season, fewer than six prior matches for either team, or a
    team without any completed season) are skipped with a logged reason,
    never zero-filled.
    """
    if any(matches[i].round_date > matches[i + 1].round_date
           for i in range(len(matches) - 1)):
        raise DatasetError("matches must be sorted by date")

    book = RatingBook(elo_cfg)
    windows: dict[str, _StatWindow] = {}
    elo_stream = _RunningTriples()
    helo_stream = _RunningTriples()
    odds_stream = _RunningTriples()
    first_season = matches[0].season_id if matches else None

    rows: list[FeatureVector] = []
    skipped: list[tuple[tuple[str, str, str, str], str]] = []

    index = 0
    while index < len(matches):
        date = matches[index].round_date
        group = []
        while index < len(matches) and matches[index].round_date == date:
            group.append(matches[index])
            index += 1

        book.observe_season(group[0].season_id)
        pca_elo = elo_stream.model()
        pca_helo = helo_stream.model()
        pca_odds = odds_stream.model()

        for record in group:
            reason = _warmup_reason(record, book, windows, first_season)
            if reason is not None:
                skipped.append((record.key, reason))
                log.info("skipped %s: %s", record.key, reason)
                continue
            rows.append(_assemble(record, book, windows, streak_window,
                                  elo_cfg, pca_elo, pca_helo, pca_odds))

        # Consume the whole date group only after all rows are emitted, so
        # same-day matches cannot influence each other's features.
        for record in group:
            home, away = book.snapshot(record.home_team, record.away_team)
            elo_stream.add(elo_probabilities(home.elo, away.elo, elo_cfg).as_tuple())
            helo_stream.add(elo_probabilities(home.ht_elo, away.ht_elo, elo_cfg).as_tuple())
            odds_stream.add(_odds_probabilities(record))
            book.consume(record)
            _push_stats(windows, record)

    return FeatureBuild(rows=rows, skipped=skipped)


def _warmup_reason(record, book: RatingBook, windows, first_season) -> str | None:
    if record.season_id == first_season:
        return "first season is warm-up"
    for team in (record.home_team, record.away_team):
        window = windows.get(team)
        if window is None or not window.full:
            return f"{team} has fewer than six prior matches"
        state = book.team(team)
        if state is None or state.last_season is None:
            return f"{team} has no completed season"
    return None


def _odds_probabilities(record: MatchRecord) -> tuple[float, float, float]:
    rate = f99(record.odds.average)
    h, d, a = record.odds.average
    return (rate / h, rate / d, rate / a)


def _push_stats(windows: dict[str, _StatWindow], record: MatchRecord) -> None:
    s = record.stats
    for team, side, sign in ((record.home_team, 0, 1), (record.away_team, 1, -1)):
        window = windows.setdefault(team, _StatWindow())
        window.push(
            goal_diff=sign * (record.ft_home_goals - record.ft_away_goals),
            shots=s.shots[side],
            on_target=s.shots_on_target[side],
            corners=s.corners[side],
            fouls=s.fouls[side],
            yellows=s.yellow_cards[side],
            reds=s.red_cards[side],
        )


def _assemble(record, book: RatingBook, windows, k, elo_cfg,
              pca_elo, pca_helo, pca_odds) -> FeatureVector:
    home, away = book.snapshot(record.home_team, record.away_team)
    wh, wa = windows[record.home_team], windows[record.away_team]

    elo_probs = elo_probabilities(home.elo, away.elo, elo_cfg)
    helo_probs = elo_probabilities(home.ht_elo, away.ht_elo, elo_cfg)
    odd_pro = _odds_probabilities(record)
    home_off, home_def = book.resolved_odm(record.home_team)
    away_off, away_def = book.resolved_odm(record.away_team)

    values = {
        "AvgGoalDiff": float(np.mean(wh.goal_diff) - np.mean(wa.goal_diff)),
        "TotalGoalDiff": float(sum(wh.goal_diff) - sum(wa.goal_diff)),
        "HomeELO": home.elo,
        "AwayELO": away.elo,
        "ELOsta": _two_value_std(home.elo, away.elo),
        "ELOHomeW": elo_probs.p_home,
        "ELOAwayW": elo_probs.p_away,
        "ELODraw": elo_probs.p_draw,
        "one_ELO": pca_project(pca_elo, elo_probs.as_tuple()),
        "HomeHELO": home.ht_elo,
        "AwayHELO": away.ht_elo,
        "HELOSta": _two_value_std(home.ht_elo, away.ht_elo),
        "ELOHHomeW": helo_probs.p_home,
        "ELOHAwayW": helo_probs.p_away,
        "ELOHDrawW": helo_probs.p_draw,
        "one_HELO": pca_project(pca_helo, helo_probs.as_tuple()),
        "HomeTeamPoint": float(home.season_points),
        "AwayTeamPoint": float(away.season_points),
        "PointDiff": float(home.season_points - away.season_points),
        "AvgHOddPro": odd_pro[0],
        "AvgDOddPro": odd_pro[1],
        "AvgAOddPro": odd_pro[2],
        "one_Odd_Pro": pca_project(pca_odds, odd_pro),
        "HomeOff": home_off,
        "HomeDef": home_def,
        "AwayOff": away_off,
        "AwayDef": away_def,
        "Offsta": home_off - away_off,
        "Defsta": home_def - away_def,
        "AvgShotSta": _two_value_std(np.mean(wh.shots), np.mean(wa.shots)),
        "AvgTargetSta": _two_value_std(np.mean(wh.on_target), np.mean(wa.on_target)),
        "ShotAccSta": _two_value_std(wh.shot_accuracy(), wa.shot_accuracy()),
        "AvgCornerSta": _two_value_std(np.mean(wh.corners), np.mean(wa.corners)),
        "AvgFoulSta": _two_value_std(np.mean(wh.fouls), np.mean(wa.fouls)),
        "HomeHWin": _pct(home.home_wins, home.home_played),
        "HomeHDraw": _pct(home.home_draws, home.home_played),
        "AwayAWin": _pct(away.away_wins, away.away_played),
        "AwayADraw": _pct(away.away_draws, away.away_played),
        "HomeWin": _pct(home.career_wins, home.career_played),
        "HomeDraw": _pct(home.career_draws, home.career_played),
        "AwayWin": _pct(away.career_wins, away.career_played),
        "AwayDraw": _pct(away.career_draws, away.career_played),
        "LSHW": _pct(home.last_season[1], home.last_season[0]),
        "LSHD": _pct(home.last_season[2], home.last_season[0]),
        "LSAW": _pct(away.last_season[1], away.last_season[0]),
        "LSAD": _pct(away.last_season[2], away.last_season[0]),
        "Ysta": float(sum(wh.yellows) - sum(wa.yellows)),
        "Rsta": float(sum(wh.reds) - sum(wa.reds)),
        "StreakH": streak(home.results, k),
        "StreakA": streak(away.results, k),
        "WStreakH": weighted_streak(home.results, k),
        "WStreakA": weighted_streak(away.results, k),
    }
    assert set(values) == set(FEATURE_COLUMNS)
    return FeatureVector(
        season_id=record.season_id,
        round_date=record.round_date.isoformat(),
        home_team=record.home_team,
        away_team=record.away_team,
        values=values,
        label=record.ft_result,
    )


# ---------------------------------------------------------------------------
# Feature table export (the featurize -> train contract)

def write_features_csv(rows: list[FeatureVector], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["season", "date", "home", "away", *FEATURE_COLUMNS, "label"])
        for row in rows:
            writer.writerow(
                [row.season_id, row.round_date, row.home_team, row.away_team]
                + [repr(row.values[c]) for c in FEATURE_COLUMNS]
                + [row.label.value])


def read_features_csv(path: str | Path) -> list[FeatureVector]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for record in csv.DictReader(fh):
            rows.append(FeatureVector(
                season_id=record["season"],
                round_date=record["date"],
                home_team=record["home"],
                away_team=record["away"],
                values={c: float(record[c]) for c in FEATURE_COLUMNS},
                label=Result(record["label"]),
            ))
    return rows
