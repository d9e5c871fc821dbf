"""Team strength ratings updated in strict match-date order.

Covers the Elo engine (full-time and half-time variants), the mutually
recursive offense/defense season ratings, points tallies and the recent
form (streak) indices. :class:`RatingBook` is the single-writer state
machine that the feature builder drives chronologically.
"""

import datetime as dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateNeighborsError, DegenerateTeamError
from .ingest import MatchRecord, Result

STAGE_VERSION = 1

#: Points awarded per match outcome, most recent last in histories.
WIN_POINTS, DRAW_POINTS, LOSS_POINTS = 3, 1, 0

#: Form window used throughout (previous six games).
STREAK_WINDOW = 6


@dataclass(frozen=True)
class EloConfig:
    """Constants for the Elo update and its win-probability conversion.

    ``prob_scale`` divides the rating difference before the linear
    win/loss probability regression is applied, i.e. the published
    regression coefficients are taken per ``prob_scale`` rating points.
    This reading is a documented interpretation choice; see README.
    """

    c: float = 10.0
    d: float = 400.0
    k0: float = 10.0
    gamma: float = 1.0
    initial_rating: float = 1000.0
    prob_scale: float = 10.0

    def validate(self) -> None:
        for name in ("c", "d", "k0", "gamma", "prob_scale"):
            if getattr(self, name) <= 0:
                raise ValueError(f"EloConfig.{name} must be positive")


DEFAULT_ELO = EloConfig()


@dataclass(frozen=True)
class OutcomeProbabilities:
    p_home: float
    p_draw: float
    p_away: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p_home, self.p_draw, self.p_away)

    def validate(self) -> None:
        triple = self.as_tuple()
        if any(p < 0.0 or p > 1.0 for p in triple):
            raise ValueError("probabilities out of [0, 1]")
        if abs(sum(triple) - 1.0) > 1e-9:
            raise ValueError("probabilities do not sum to 1")


def elo_expectation(r_home: float, r_away: float,
                    cfg: EloConfig = DEFAULT_ELO) -> tuple[float, float]:
    """Expected match scores for both sides; always sums to 1."""
    e_home = 1.0 / (1.0 + cfg.c ** ((r_away - r_home) / cfg.d))
    return e_home, 1.0 - e_home


def elo_update(r_home: float, r_away: float, ft_result: Result,
               goal_diff_abs: int, cfg: EloConfig = DEFAULT_ELO) -> tuple[float, float]:
    """Post-match ratings; zero-sum by construction.

    The correction is k0*(1+delta)^gamma times the gap between the actual
    score (1/0.5/0) and the pre-match expectation, applied with opposite
    signs to the two sides.
    """
    if goal_diff_abs < 0:
        raise ValueError("goal_diff_abs must be non-negative")
    if ft_result is Result.DRAW and goal_diff_abs != 0:
        raise ValueError("a draw cannot have a nonzero goal difference")
    score_home = {Result.HOME_WIN: 1.0, Result.DRAW: 0.5, Result.AWAY_WIN: 0.0}[ft_result]
    e_home, _ = elo_expectation(r_home, r_away, cfg)
    k = cfg.k0 * (1.0 + goal_diff_abs) ** cfg.gamma
    delta = k * (score_home - e_home)
    return r_home + delta, r_away - delta


# Linear win/loss probability regression applied to the scaled rating gap.
_P_HOME_INTERCEPT, _P_HOME_SLOPE = 0.448, 0.0053
_P_AWAY_INTERCEPT, _P_AWAY_SLOPE = 0.245, 0.0039
_PROB_FLOOR, _PROB_CEIL = 0.01, 0.98


def elo_probabilities(r_home: float, r_away: float,
                      cfg: EloConfig = DEFAULT_ELO) -> OutcomeProbabilities:
    """Convert a rating pair into a home/draw/away probability triple.

    The raw regression triple is clamped component-wise to
    [0.01, 0.98] and renormalized to sum exactly to 1.
    """
    diff = (r_home - r_away) / cfg.prob_scale
    p_home = _P_HOME_INTERCEPT + _P_HOME_SLOPE * diff
    p_away = _P_AWAY_INTERCEPT + _P_AWAY_SLOPE * (-diff)
    p_draw = 1.0 - (p_home + p_away)
    clamped = [min(_PROB_CEIL, max(_PROB_FLOOR, p)) for p in (p_home, p_draw, p_away)]
    total = sum(clamped)
    return OutcomeProbabilities(p_home=clamped[0] / total,
                                p_draw=clamped[1] / total,
                                p_away=clamped[2] / total)


# ---------------------------------------------------------------------------
# Offense-Defense Model

def odm_fit(goal_matrix: np.ndarray, tol: float = 1e-8,
            max_iter: int = 10000) -> tuple[np.ndarray, np.ndarray]:
    """Fixed point of the mutual offense/defense season ratings.

    ``goal_matrix[i][j]`` holds the goals scored by team j against team i
    over the season. Alternating iteration from an all-ones start;
    offense is reported normalized so it sums to the team count, with
    defense rescaled consistently. Raises :class:`DegenerateTeamError`
    for a team with zero goals scored or conceded (the season builder
    applies add-one smoothing and retries).
    """
    a = np.asarray(goal_matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("goal matrix must be square")
    if np.any(a < 0):
        raise ValueError("goal matrix must be non-negative")
    n = a.shape[0]
    scored = a.sum(axis=0)
    conceded = a.sum(axis=1)
    for j in range(n):
        if scored[j] == 0:
            raise DegenerateTeamError(j, "no goals scored this season")
        if conceded[j] == 0:
            raise DegenerateTeamError(j, "no goals conceded this season")

    offense = np.ones(n)
    defense = np.ones(n)
    for _ in range(max_iter):
        new_offense = (a / defense[:, None]).sum(axis=0)
        new_defense = (a / new_offense[None, :]).sum(axis=1)
        change = max(np.max(np.abs(new_offense - offense)),
                     np.max(np.abs(new_defense - defense)))
        offense, defense = new_offense, new_defense
        if change < tol:
            break
    scale = n / offense.sum()
    return offense * scale, defense / scale


def odm_new_team(goals_new: float, neighbor_below: tuple[float, float],
                 neighbor_above: tuple[float, float]) -> float:
    """Linearly interpolate a rating from the season goal ranking.

    Neighbors are (goals, rating) pairs adjacent to the new team in the
    goal ranking; they may flank it on one side, in which case this
    extrapolates along the same line.
    """
    g1, r1 = neighbor_below
    g2, r2 = neighbor_above
    if g1 == g2:
        raise DegenerateNeighborsError("neighbor goal counts coincide")
    return r1 + (goals_new - g1) * (r2 - r1) / (g2 - g1)


# ---------------------------------------------------------------------------
# Streak indices

def _pad_history(history, k: int) -> list[int]:
    scores = list(history)[-k:]
    if len(scores) < k:  # season starts: neutral draw prior on the left
        scores = [DRAW_POINTS] * (k - len(scores)) + scores
    return scores


def streak(history, k: int = STREAK_WINDOW) -> float:
    """Normalized points haul over the last k matches, in [0, 1]."""
    if k < 1:
        raise ValueError("k must be at least 1")
    scores = _pad_history(history, k)
    return sum(scores) / (3.0 * k)


def weighted_streak(history, k: int = STREAK_WINDOW) -> float:
    """Like :func:`streak` but linearly up-weighting recent matches.

    Weights are 1..k from oldest to newest; the normalizer 3k(k+1) makes
    a full winning streak map to exactly 1.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    scores = _pad_history(history, k)
    total = sum(2 * w * res for w, res in enumerate(scores, start=1))
    return total / (3.0 * k * (k + 1))


# ---------------------------------------------------------------------------
# Sequential rating engine

@dataclass
class TeamState:
    """Evolving per-team counters; all values reflect completed matches only."""

    elo: float
    ht_elo: float
    season_points: int = 0
    results: list[int] = field(default_factory=list)  # 3/1/0 per match, oldest first
    season_played: int = 0
    season_wins: int = 0
    season_draws: int = 0
    season_goals_for: int = 0
    season_goals_against: int = 0
    career_played: int = 0
    career_wins: int = 0
    career_draws: int = 0
    home_played: int = 0
    home_wins: int = 0
    home_draws: int = 0
    away_played: int = 0
    away_wins: int = 0
    away_draws: int = 0
    last_season: tuple[int, int, int] | None = None  # (played, wins, draws)


class RatingBook:
    """Single-writer rating state over a chronological match stream.

    ``consume`` must be fed matches in date order. Season rollover is
    detected from the record's season id: it archives last-season
    percentages, fits the offense/defense ratings on the finished
    season's goal matrix (with add-one smoothing for degenerate teams)
    and resets the per-season counters.
    """

    def __init__(self, elo_cfg: EloConfig = DEFAULT_ELO):
        elo_cfg.validate()
        self.elo_cfg = elo_cfg
        self.teams: dict[str, TeamState] = {}
        self.current_season: str | None = None
        self.seasons_completed = 0
        self._previous_roster: set[str] = set()
        self._season_roster: set[str] = set()
        self._season_goals: dict[tuple[str, str], int] = {}  # (scorer, opponent) -> goals
        self.odm_ratings: dict[str, tuple[float, float]] = {}

    # -- bootstrap ---------------------------------------------------------

    def _enter_team(self, team: str) -> TeamState:
        state = self.teams.get(team)
        if state is not None:
            return state
        rating = self.elo_cfg.initial_rating
        ht_rating = self.elo_cfg.initial_rating
        if self.seasons_completed:
            # Promoted sides start from the weakest rating they replace:
            # last season's teams that have not appeared in this season yet.
            candidates = [self.teams[t] for t in self._previous_roster
                          if t not in self._season_roster]
            if candidates:
                rating = min(c.elo for c in candidates)
                ht_rating = min(c.ht_elo for c in candidates)
        state = TeamState(elo=rating, ht_elo=ht_rating)
        self.teams[team] = state
        return state

    def _rollover(self, season_id: str) -> None:
        if self.current_season is not None:
            for team in self._season_roster:
                s = self.teams[team]
                s.last_season = (s.season_played, s.season_wins, s.season_draws)
            self._fit_season_odm()
            self.seasons_completed += 1
            self._previous_roster = set(self._season_roster)
        self.current_season = season_id
        self._season_roster = set()
        self._season_goals = {}
        for state in self.teams.values():
            state.season_points = 0
            state.season_played = 0
            state.season_wins = 0
            state.season_draws = 0
            state.season_goals_for = 0
            state.season_goals_against = 0

    def _fit_season_odm(self) -> None:
        teams = sorted(self._season_roster)
        if len(teams) < 2:
            return
        index = {t: i for i, t in enumerate(teams)}
        a = np.zeros((len(teams), len(teams)))
        for (scorer, opponent), goals in self._season_goals.items():
            a[index[opponent], index[scorer]] += goals
        while True:
            try:
                offense, defense = odm_fit(a)
                break
            except DegenerateTeamError as exc:
                j = exc.team
                # Add-one smoothing on the offending row/column keeps the
                # fixed point well defined; the effect fades with goals.
                mask = ~np.eye(len(teams), dtype=bool)
                if a[:, j].sum() == 0:
                    a[mask[:, j], j] += 1
                else:
                    a[j, mask[j, :]] += 1
        for team, off, dfn in zip(teams, offense, defense):
            self.odm_ratings[team] = (float(off), float(dfn))

    # -- queries -----------------------------------------------------------

    def team(self, label: str) -> TeamState | None:
        return self.teams.get(label)

    def snapshot(self, home: str, away: str) -> tuple[TeamState, TeamState]:
        """Pre-match states; creates entries (with promoted-team Elo
        seeding) so ratings are defined before the first consume."""
        return self._enter_team(home), self._enter_team(away)

    def resolved_odm(self, team: str) -> tuple[float, float]:
        """Season ratings for a team, extrapolating for newcomers.

        Teams without a fitted season are placed in the current season's
        goal rankings among rated teams and interpolated linearly; with
        no usable neighbors the rated-league mean is used.
        """
        rating = self.odm_ratings.get(team)
        if rating is not None:
            return rating
        state = self.teams.get(team)
        goals_for = state.season_goals_for if state else 0
        goals_against = state.season_goals_against if state else 0
        offense = self._extrapolate(team, goals_for, axis=0)
        defense = self._extrapolate(team, goals_against, axis=1)
        return offense, defense

    def _extrapolate(self, team: str, goals: int, axis: int) -> float:
        rated = [(t, self.odm_ratings[t][axis]) for t in self.odm_ratings]
        if not rated:
            return 1.0
        season_goals = []
        for t, rating in rated:
            s = self.teams.get(t)
            if s is None or s.season_played == 0:
                continue
            g = s.season_goals_for if axis == 0 else s.season_goals_against
            season_goals.append((g, rating))
        mean_rating = float(np.mean([r for _, r in rated]))
        if len(season_goals) < 2:
            return mean_rating
        season_goals.sort(key=lambda pair: pair[0])
        below = [(g, r) for g, r in season_goals if g <= goals]
        above = [(g, r) for g, r in season_goals if g > goals]
        if below and above:
            pair = (below[-1], above[0])
        elif len(above) >= 2:
            pair = (above[0], above[1])
        elif len(below) >= 2:
            pair = (below[-2], below[-1])
        else:
            return mean_rating
        try:
            return odm_new_team(goals, pair[0], pair[1])
        except DegenerateNeighborsError:
            return (pair[0][1] + pair[1][1]) / 2.0

    # -- updates -----------------------------------------------------------

    def observe_season(self, season_id: str) -> None:
        """Roll the season over if ``season_id`` starts a new one.

        Callers that snapshot state before consuming a record must call
        this first so promoted-team seeding and per-season counters refer
        to the right season.
        """
        if season_id != self.current_season:
            self._rollover(season_id)

    def consume(self, record: MatchRecord) -> None:
        self.observe_season(record.season_id)
        home = self._enter_team(record.home_team)
        away = self._enter_team(record.away_team)
        self._season_roster.add(record.home_team)
        self._season_roster.add(record.away_team)

        home.elo, away.elo = elo_update(
            home.elo, away.elo, record.ft_result,
            abs(record.ft_home_goals - record.ft_away_goals), self.elo_cfg)
        home.ht_elo, away.ht_elo = elo_update(
            home.ht_elo, away.ht_elo, record.ht_result,
            abs(record.ht_home_goals - record.ht_away_goals), self.elo_cfg)

        res_home = {Result.HOME_WIN: WIN_POINTS, Result.DRAW: DRAW_POINTS,
                    Result.AWAY_WIN: LOSS_POINTS}[record.ft_result]
        res_away = {Result.HOME_WIN: LOSS_POINTS, Result.DRAW: DRAW_POINTS,
                    Result.AWAY_WIN: WIN_POINTS}[record.ft_result]
        home.results.append(res_home)
        away.results.append(res_away)
        home.season_points += res_home
        away.season_points += res_away

        for state, mine, theirs, won, venue in (
                (home, record.ft_home_goals, record.ft_away_goals,
                 record.ft_result is Result.HOME_WIN, "home"),
                (away, record.ft_away_goals, record.ft_home_goals,
                 record.ft_result is Result.AWAY_WIN, "away")):
            drew = record.ft_result is Result.DRAW
            state.season_played += 1
            state.season_wins += int(won)
            state.season_draws += int(drew)
            state.season_goals_for += mine
            state.season_goals_against += theirs
            state.career_played += 1
            state.career_wins += int(won)
            state.career_draws += int(drew)
            if venue == "home":
                state.home_played += 1
                state.home_wins += int(won)
                state.home_draws += int(drew)
            else:
                state.away_played += 1
                state.away_wins += int(won)
                state.away_draws += int(drew)

        self._season_goals[(record.home_team, record.away_team)] = \
            self._season_goals.get((record.home_team, record.away_team), 0) + record.ft_home_goals
        self._season_goals[(record.away_team, record.home_team)] = \
            self._season_goals.get((record.away_team, record.home_team), 0) + record.ft_away_goals

    # -- export ------------------------------------------------------------

    def snapshot_rows(self, as_of: dt.date) -> list[dict]:
        rows = []
        for team in sorted(self.teams):
            state = self.teams[team]
            off, dfn = self.resolved_odm(team)
            rows.append({
                "date": as_of.isoformat(),
                "team": team,
                "elo": state.elo,
                "ht_elo": state.ht_elo,
                "odm_offense": off,
                "odm_defense": dfn,
                "points": state.season_points,
            })
        return rows


def write_snapshots_jsonl(rows: list[dict], path: str | Path, append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
