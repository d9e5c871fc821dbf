"""Season CSV ingestion, normalized match records, and synthetic leagues.

Input files follow the football-data column convention (FTHG/FTAG/FTR,
HTHG/HTAG/HTR, match statistics, per-bookmaker odds triples). Records are
normalized into :class:`MatchRecord` and serialized to line-delimited JSON
for the downstream stages.
"""

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DatasetError, SchemaError

STAGE_VERSION = 1

#: Canonical bookmaker labels and their column prefixes in source CSVs.
BOOKMAKERS = ("Bet365", "Interwetten", "Bet&Win", "Pinnacle", "VCBet", "WilliamHill")
BOOK_PREFIXES = {
    "Bet365": "B365",
    "Interwetten": "IW",
    "Bet&Win": "BW",
    "Pinnacle": "PS",
    "VCBet": "VC",
    "WilliamHill": "WH",
}


class Result(str, Enum):
    """Full- or half-time outcome from the home side's perspective."""

    HOME_WIN = "H"
    DRAW = "D"
    AWAY_WIN = "A"

    @property
    def index(self) -> int:
        return _RESULT_ORDER.index(self)

    @staticmethod
    def from_goals(home: int, away: int) -> "Result":
        if home > away:
            return Result.HOME_WIN
        if home < away:
            return Result.AWAY_WIN
        return Result.DRAW


#: Fixed class order used everywhere (confidence triples, tie-breaking).
_RESULT_ORDER = (Result.HOME_WIN, Result.DRAW, Result.AWAY_WIN)
RESULT_ORDER = _RESULT_ORDER


def normalize_team(label: str) -> str:
    """Trim, collapse whitespace and casefold a team label."""
    return " ".join(label.split()).casefold()


@dataclass(frozen=True)
class MatchStats:
    """Per-side match statistics as (home, away) pairs of counts."""

    shots: tuple[int, int]
    shots_on_target: tuple[int, int]
    corners: tuple[int, int]
    fouls: tuple[int, int]
    yellow_cards: tuple[int, int]
    red_cards: tuple[int, int]

    def validate(self) -> None:
        for name in ("shots", "shots_on_target", "corners", "fouls",
                     "yellow_cards", "red_cards"):
            pair = getattr(self, name)
            if len(pair) != 2 or any(v < 0 for v in pair):
                raise ValueError(f"{name} must be a non-negative (home, away) pair")
        for side in (0, 1):
            if self.shots_on_target[side] > self.shots[side]:
                raise ValueError("shots_on_target exceeds shots")


@dataclass(frozen=True)
class OddsBoard:
    """Decimal odds per bookmaker plus the market-average triple.

    Triples are ordered (home, draw, away). Bookmakers with incomplete or
    invalid quotes are simply absent; the average is always present.
    """

    per_bookmaker: dict[str, tuple[float, float, float]]
    average: tuple[float, float, float]

    def validate(self) -> None:
        for label, triple in self.per_bookmaker.items():
            if label not in BOOKMAKERS:
                raise ValueError(f"unknown bookmaker {label!r}")
            if len(triple) != 3 or any(o <= 1.0 for o in triple):
                raise ValueError(f"odds for {label} must all exceed 1.0")
        if len(self.average) != 3 or any(o <= 1.0 for o in self.average):
            raise ValueError("average odds must all exceed 1.0")


@dataclass(frozen=True)
class MatchRecord:
    """One played match with results, statistics and the odds board."""

    season_id: str
    round_date: dt.date
    home_team: str
    away_team: str
    ft_home_goals: int
    ft_away_goals: int
    ft_result: Result
    ht_home_goals: int
    ht_away_goals: int
    ht_result: Result
    stats: MatchStats
    odds: OddsBoard

    @property
    def key(self) -> tuple[str, str, str, str]:
        return (self.season_id, self.round_date.isoformat(),
                self.home_team, self.away_team)

    def validate(self) -> None:
        if self.ft_home_goals < 0 or self.ft_away_goals < 0:
            raise ValueError("negative full-time goals")
        if self.ht_home_goals < 0 or self.ht_away_goals < 0:
            raise ValueError("negative half-time goals")
        if Result.from_goals(self.ft_home_goals, self.ft_away_goals) != self.ft_result:
            raise ValueError("full-time result inconsistent with goals")
        if Result.from_goals(self.ht_home_goals, self.ht_away_goals) != self.ht_result:
            raise ValueError("half-time result inconsistent with goals")
        if self.ht_home_goals > self.ft_home_goals or self.ht_away_goals > self.ft_away_goals:
            raise ValueError("half-time goals exceed full-time goals")
        if self.home_team == self.away_team:
            raise ValueError("a team cannot play itself")
        self.stats.validate()
        self.odds.validate()

    def to_dict(self) -> dict:
        return {
            "season": self.season_id,
            "date": self.round_date.isoformat(),
            "home": self.home_team,
            "away": self.away_team,
            "ft": [self.ft_home_goals, self.ft_away_goals],
            "ft_result": self.ft_result.value,
            "ht": [self.ht_home_goals, self.ht_away_goals],
            "ht_result": self.ht_result.value,
            "stats": {name: list(getattr(self.stats, name))
                      for name in ("shots", "shots_on_target", "corners",
                                   "fouls", "yellow_cards", "red_cards")},
            "odds": {
                "books": {label: list(triple)
                          for label, triple in self.odds.per_bookmaker.items()},
                "average": list(self.odds.average),
            },
        }

    @staticmethod
    def from_dict(d: dict) -> "MatchRecord":
        stats = MatchStats(**{k: tuple(v) for k, v in d["stats"].items()})
        odds = OddsBoard(
            per_bookmaker={k: tuple(v) for k, v in d["odds"]["books"].items()},
            average=tuple(d["odds"]["average"]),
        )
        rec = MatchRecord(
            season_id=d["season"],
            round_date=dt.date.fromisoformat(d["date"]),
            home_team=d["home"],
            away_team=d["away"],
            ft_home_goals=d["ft"][0],
            ft_away_goals=d["ft"][1],
            ft_result=Result(d["ft_result"]),
            ht_home_goals=d["ht"][0],
            ht_away_goals=d["ht"][1],
            ht_result=Result(d["ht_result"]),
            stats=stats,
            odds=odds,
        )
        rec.validate()
        return rec


# ---------------------------------------------------------------------------
# CSV schema

_DEFAULT_COLUMNS = {
    "date": "Date",
    "home_team": "HomeTeam",
    "away_team": "AwayTeam",
    "ft_home_goals": "FTHG",
    "ft_away_goals": "FTAG",
    "ft_result": "FTR",
    "ht_home_goals": "HTHG",
    "ht_away_goals": "HTAG",
    "ht_result": "HTR",
    "home_shots": "HS",
    "away_shots": "AS",
    "home_shots_on_target": "HST",
    "away_shots_on_target": "AST",
    "home_corners": "HC",
    "away_corners": "AC",
    "home_fouls": "HF",
    "away_fouls": "AF",
    "home_yellow": "HY",
    "away_yellow": "AY",
    "home_red": "HR",
    "away_red": "AR",
}

_AVG_COLUMNS = ("AvgH", "AvgD", "AvgA")
_AVG_SYNONYMS = ("BbAvH", "BbAvD", "BbAvA")


@dataclass(frozen=True)
class CsvSchema:
    """Mapping from logical fields to CSV column names.

    ``date_format`` is one of ``"dd/mm/yy"`` (default, the source site's
    convention), ``"dd/mm/yyyy"``, or ``"auto"`` which picks by the width
    of the year token. ``season_id`` overrides the season label derived
    from the file name.
    """

    columns: dict[str, str] = field(default_factory=lambda: dict(_DEFAULT_COLUMNS))
    date_format: str = "dd/mm/yy"
    season_id: str | None = None

    @staticmethod
    def from_config(cfg: dict) -> "CsvSchema":
        cols = dict(_DEFAULT_COLUMNS)
        cols.update(cfg.get("columns", {}))
        return CsvSchema(
            columns=cols,
            date_format=cfg.get("date_format", "dd/mm/yy"),
            season_id=cfg.get("season_id"),
        )


@dataclass
class ParseReport:
    """Per-file ingestion outcome: accepted count and row-indexed rejects."""

    path: str
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "accepted": self.accepted,
            "rejected": [{"row": i, "reason": r} for i, r in self.rejected],
        }


def _parse_date(text: str, date_format: str) -> dt.date:
    text = text.strip()
    if "-" in text:  # ISO fallback used by our own exports
        return dt.date.fromisoformat(text)
    parts = text.split("/")
    if len(parts) != 3:
        raise ValueError(f"unrecognized date {text!r}")
    if date_format == "dd/mm/yyyy":
        fmt = "%d/%m/%Y"
    elif date_format == "dd/mm/yy":
        fmt = "%d/%m/%y" if len(parts[2]) == 2 else "%d/%m/%Y"
    elif date_format == "auto":
        fmt = "%d/%m/%Y" if len(parts[2]) == 4 else "%d/%m/%y"
    else:
        raise SchemaError(f"unknown date_format {date_format!r}")
    return dt.datetime.strptime(text, fmt).date()


def _cell_int(row: dict, column: str) -> int:
    raw = row.get(column, "")
    value = int(float(raw))
    if value < 0:
        raise ValueError(f"negative value in {column}")
    return value


def _book_triple(row: dict, prefix: str) -> tuple[float, float, float] | None:
    """Read one bookmaker's (H, D, A) odds; None when absent or invalid."""
    triple = []
    for suffix in ("H", "D", "A"):
        raw = (row.get(prefix + suffix) or "").strip()
        if not raw:
            return None
        try:
            odds = float(raw)
        except ValueError:
            return None
        if not math.isfinite(odds) or odds <= 1.0:
            return None
        triple.append(odds)
    return tuple(triple)


def parse_season_csv(path: str | Path,
                     schema: CsvSchema | None = None) -> tuple[list[MatchRecord], ParseReport]:
    """Parse one season CSV into validated, date-ordered match records.

    Rows violating record invariants are rejected with row-indexed reasons
    in the returned :class:`ParseReport`; bookmakers with missing or
    invalid odds are dropped per row. Raises :class:`SchemaError` when a
    mandatory column is absent and :class:`DatasetError` for empty files.
    """
    schema = schema or CsvSchema()
    path = Path(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty file")
        header = {name.strip() for name in reader.fieldnames if name}
        for logical, column in schema.columns.items():
            if column not in header:
                raise SchemaError(f"{path}: missing mandatory column {column!r} ({logical})")
        has_avg = all(c in header for c in _AVG_COLUMNS)
        has_bbav = all(c in header for c in _AVG_SYNONYMS)
        season_id = schema.season_id or path.stem

        report = ParseReport(path=str(path))
        records: list[MatchRecord] = []
        for index, row in enumerate(reader, start=2):  # 1-based, after header
            try:
                records.append(_parse_row(row, schema, season_id, has_avg, has_bbav))
                report.accepted += 1
            except (ValueError, KeyError) as exc:
                report.rejected.append((index, str(exc)))

    if report.accepted == 0 and not report.rejected:
        raise DatasetError(f"{path}: no data rows")
    records.sort(key=lambda r: r.round_date)
    return records, report


def _parse_row(row: dict, schema: CsvSchema, season_id: str,
               has_avg: bool, has_bbav: bool) -> MatchRecord:
    cols = schema.columns
    home = normalize_team(row[cols["home_team"]])
    away = normalize_team(row[cols["away_team"]])
    if not home or not away:
        raise ValueError("blank team label")

    ft_h = _cell_int(row, cols["ft_home_goals"])
    ft_a = _cell_int(row, cols["ft_away_goals"])
    ht_h = _cell_int(row, cols["ht_home_goals"])
    ht_a = _cell_int(row, cols["ht_away_goals"])
    ft_result = Result(row[cols["ft_result"]].strip().upper())
    ht_result = Result(row[cols["ht_result"]].strip().upper())

    stats = MatchStats(
        shots=(_cell_int(row, cols["home_shots"]), _cell_int(row, cols["away_shots"])),
        shots_on_target=(_cell_int(row, cols["home_shots_on_target"]),
                         _cell_int(row, cols["away_shots_on_target"])),
        corners=(_cell_int(row, cols["home_corners"]), _cell_int(row, cols["away_corners"])),
        fouls=(_cell_int(row, cols["home_fouls"]), _cell_int(row, cols["away_fouls"])),
        yellow_cards=(_cell_int(row, cols["home_yellow"]), _cell_int(row, cols["away_yellow"])),
        red_cards=(_cell_int(row, cols["home_red"]), _cell_int(row, cols["away_red"])),
    )

    books = {}
    for label in BOOKMAKERS:
        triple = _book_triple(row, BOOK_PREFIXES[label])
        if triple is not None:
            books[label] = triple
    average = None
    if has_avg:
        average = _book_triple(row, "Avg")
    if average is None and has_bbav:
        average = _book_triple(row, "BbAv")
    if average is None:
        if not books:
            raise ValueError("no usable odds in row")
        cols_mean = np.mean([list(t) for t in books.values()], axis=0)
        average = tuple(float(x) for x in cols_mean)

    record = MatchRecord(
        season_id=season_id,
        round_date=_parse_date(row[cols["date"]], schema.date_format),
        home_team=home,
        away_team=away,
        ft_home_goals=ft_h,
        ft_away_goals=ft_a,
        ft_result=ft_result,
        ht_home_goals=ht_h,
        ht_away_goals=ht_a,
        ht_result=ht_result,
        stats=stats,
        odds=OddsBoard(per_bookmaker=books, average=average),
    )
    record.validate()
    return record


# ---------------------------------------------------------------------------
# Normalized line-delimited output

def write_records_jsonl(records: list[MatchRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


def read_records_jsonl(path: str | Path) -> list[MatchRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(MatchRecord.from_dict(json.loads(line)))
    return records


_CSV_HEADER = (
    ["Date", "HomeTeam", "AwayTeam", "FTHG", "FTAG", "FTR", "HTHG", "HTAG", "HTR",
     "HS", "AS", "HST", "AST", "HC", "AC", "HF", "AF", "HY", "AY", "HR", "AR"]
    + [BOOK_PREFIXES[b] + s for b in BOOKMAKERS for s in ("H", "D", "A")]
    + list(_AVG_COLUMNS)
)


def write_records_csv(records: list[MatchRecord], path: str | Path) -> None:
    """Export records in the football-data column convention (round-trips
    through :func:`parse_season_csv` with ``date_format="dd/mm/yyyy"``)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for rec in records:
            row = [rec.round_date.strftime("%d/%m/%Y"), rec.home_team, rec.away_team,
                   rec.ft_home_goals, rec.ft_away_goals, rec.ft_result.value,
                   rec.ht_home_goals, rec.ht_away_goals, rec.ht_result.value]
            s = rec.stats
            row += [s.shots[0], s.shots[1], s.shots_on_target[0], s.shots_on_target[1],
                    s.corners[0], s.corners[1], s.fouls[0], s.fouls[1],
                    s.yellow_cards[0], s.yellow_cards[1], s.red_cards[0], s.red_cards[1]]
            for book in BOOKMAKERS:
                triple = rec.odds.per_bookmaker.get(book)
                row += ["", "", ""] if triple is None else [repr(v) for v in triple]
            row += [repr(v) for v in rec.odds.average]
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Synthetic league generation

@dataclass(frozen=True)
class LeagueParams:
    """Knobs for the synthetic league generator.

    ``home_lift`` is the log-scale goal-rate bump for playing at home; it
    is deliberately left out of the bookmaker pricing so that blanket
    home betting carries a known positive edge before the margin.
    ``noise_coupling`` widens per-book deviations on lopsided matches,
    which concentrates Kelly Type 1 labels on predictable fixtures.
    """

    base_rate: float = 1.32          # geometric-mean goals per side
    home_lift: float = 0.24
    strength_sd: float = 0.35
    season_jitter: float = 0.08
    margin: float = 0.05             # bookmaker overround on the average book
    book_noise: float = 0.015        # baseline per-book log-odds deviation
    noise_coupling: float = 4.0
    max_goals: int = 12


@dataclass(frozen=True)
class MatchTruth:
    """Generator-internal ground truth exposed for tests and demos."""

    p_true: tuple[float, float, float]    # with home lift
    p_priced: tuple[float, float, float]  # what the books price from


def _poisson_pmf(lam: float, kmax: int) -> np.ndarray:
    ks = np.arange(kmax + 1)
    log_p = -lam + ks * math.log(lam) - np.array([math.lgamma(k + 1) for k in ks])
    pmf = np.exp(log_p)
    return pmf / pmf.sum()


def _outcome_probs(lam_home: float, lam_away: float, kmax: int) -> tuple[float, float, float]:
    grid = np.outer(_poisson_pmf(lam_home, kmax), _poisson_pmf(lam_away, kmax))
    p_home = float(np.tril(grid, -1).sum())
    p_away = float(np.triu(grid, 1).sum())
    p_draw = float(np.trace(grid))
    total = p_home + p_draw + p_away
    return p_home / total, p_draw / total, p_away / total


def _round_robin_rounds(n: int) -> list[list[tuple[int, int]]]:
    """Single round-robin via the circle method; (home, away) index pairs."""
    teams = list(range(n))
    rounds = []
    for r in range(n - 1):
        pairs = []
        for i in range(n // 2):
            a, b = teams[i], teams[n - 1 - i]
            pairs.append((a, b) if (r + i) % 2 == 0 else (b, a))
        rounds.append(pairs)
        teams = [teams[0]] + [teams[-1]] + teams[1:-1]
    return rounds


def synthesize_league(team_count: int, seasons: int, seed: int,
                      params: LeagueParams | None = None) -> list[MatchRecord]:
    """Generate a deterministic double round-robin league.

    Each season every ordered pair of teams meets once, so a season has
    ``team_count * (team_count - 1)`` matches. Goals are Poisson draws from
    per-team latent attack/defense strengths; odds come from the latent
    outcome probabilities with a configurable overround and per-bookmaker
    noise. Output always passes :class:`MatchRecord` validation.
    """
    records, _ = synthesize_league_detailed(team_count, seasons, seed, params)
    return records


def synthesize_league_detailed(
        team_count: int, seasons: int, seed: int,
        params: LeagueParams | None = None) -> tuple[list[MatchRecord], list[MatchTruth]]:
    """Like :func:`synthesize_league` but also returns per-match truth."""
    if team_count % 2 != 0 or team_count < 4:
        raise ValueError("team_count must be even and at least 4")
    if seasons < 1:
        raise ValueError("seasons must be at least 1")
    p = params or LeagueParams()
    rng = np.random.default_rng(seed)

    teams = [f"team{i + 1:02d}" for i in range(team_count)]
    attack = rng.normal(0.0, p.strength_sd, team_count)
    defense = rng.normal(0.0, p.strength_sd, team_count)
    mu = math.log(p.base_rate)

    base_date = dt.date(2001, 8, 4)
    rounds_per_season = 2 * (team_count - 1)
    season_days = max(364, rounds_per_season * 7 + 28)

    records: list[MatchRecord] = []
    truths: list[MatchTruth] = []
    for season in range(seasons):
        season_id = f"S{season + 1:02d}"
        season_start = base_date + dt.timedelta(days=season * season_days)
        atk = attack + rng.normal(0.0, p.season_jitter, team_count)
        dfn = defense + rng.normal(0.0, p.season_jitter, team_count)

        first_half = _round_robin_rounds(team_count)
        schedule = first_half + [[(b, a) for (a, b) in pairs] for pairs in first_half]
        for round_idx, pairs in enumerate(schedule):
            round_date = season_start + dt.timedelta(days=7 * round_idx)
            for hi, ai in pairs:
                rec, truth = _synth_match(season_id, round_date, teams, hi, ai,
                                          atk, dfn, mu, p, rng)
                records.append(rec)
                truths.append(truth)
    return records, truths


def _price_board(p_priced: tuple[float, float, float], p_max: float,
                 p: LeagueParams, rng: np.random.Generator):
    sigma = p.book_noise * (1.0 + p.noise_coupling * max(0.0, p_max - 1 / 3) / (2 / 3))
    books = {}
    for label in BOOKMAKERS:
        noise = rng.normal(0.0, sigma, 3)
        triple = tuple(
            max(1.01, 1.0 / (prob * (1.0 + p.margin)) * math.exp(e))
            for prob, e in zip(p_priced, noise)
        )
        books[label] = triple
    average = tuple(float(np.mean([b[i] for b in books.values()])) for i in range(3))
    return books, average


def _synth_match(season_id, round_date, teams, hi, ai, atk, dfn, mu,
                 p: LeagueParams, rng: np.random.Generator):
    lam_home = math.exp(mu + p.home_lift / 2 + atk[hi] - dfn[ai])
    lam_away = math.exp(mu - p.home_lift / 2 + atk[ai] - dfn[hi])
    p_true = _outcome_probs(lam_home, lam_away, p.max_goals)

    lam_h0 = math.exp(mu + atk[hi] - dfn[ai])
    lam_a0 = math.exp(mu + atk[ai] - dfn[hi])
    p_priced = _outcome_probs(lam_h0, lam_a0, p.max_goals)

    ft_h = int(rng.poisson(lam_home))
    ft_a = int(rng.poisson(lam_away))
    ht_h = int(rng.binomial(ft_h, 0.46)) if ft_h else 0
    ht_a = int(rng.binomial(ft_a, 0.46)) if ft_a else 0

    edge_h = atk[hi] - dfn[ai]
    edge_a = atk[ai] - dfn[hi]
    shots_h = int(rng.poisson(10.0 * math.exp(0.35 * edge_h))) + ft_h
    shots_a = int(rng.poisson(9.0 * math.exp(0.35 * edge_a))) + ft_a
    on_target_h = int(rng.binomial(shots_h, min(0.65, 0.30 + 0.06 * max(0.0, edge_h)))) if shots_h else 0
    on_target_a = int(rng.binomial(shots_a, min(0.65, 0.30 + 0.06 * max(0.0, edge_a)))) if shots_a else 0
    stats = MatchStats(
        shots=(shots_h, shots_a),
        shots_on_target=(on_target_h, on_target_a),
        corners=(int(rng.poisson(5.2 * math.exp(0.25 * edge_h))),
                 int(rng.poisson(4.8 * math.exp(0.25 * edge_a)))),
        fouls=(int(rng.poisson(10.5 * math.exp(-0.08 * edge_h))),
               int(rng.poisson(11.0 * math.exp(-0.08 * edge_a)))),
        yellow_cards=(int(rng.poisson(1.5)), int(rng.poisson(1.7))),
        red_cards=(int(rng.poisson(0.06)), int(rng.poisson(0.07))),
    )

    books, average = _price_board(p_priced, max(p_priced), p, rng)
    record = MatchRecord(
        season_id=season_id,
        round_date=round_date,
        home_team=teams[hi],
        away_team=teams[ai],
        ft_home_goals=ft_h,
        ft_away_goals=ft_a,
        ft_result=Result.from_goals(ft_h, ft_a),
        ht_home_goals=ht_h,
        ht_away_goals=ht_a,
        ht_result=Result.from_goals(ht_h, ht_a),
        stats=stats,
        odds=OddsBoard(per_bookmaker=books, average=average),
    )
    record.validate()
    return record, MatchTruth(p_true=p_true, p_priced=p_priced)
