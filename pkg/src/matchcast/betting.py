"""Unit-stake betting simulation against recorded bookmaker odds.

A bet backs the model's predicted outcome whenever the match passes the
strategy's type filter and the prediction's confidence clears the
threshold. Stakes are always one unit; profit is odds minus one on a
win and minus one otherwise. Zero-bet ROI is reported as undefined
(None), never as zero.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ProtocolError
from .ingest import BOOKMAKERS, MatchRecord, OddsBoard, Result
from .kelly import MatchType
from .models import PredictionOutcome

STAGE_VERSION = 1

log = logging.getLogger(__name__)

BEST_ODDS = "best-odds"

#: Threshold sweep mirroring the confidence-strategy families.
DEFAULT_THRESHOLDS = (0.4, 0.5, 0.6, 0.7)

MatchKey = tuple[str, str, str, str]


@dataclass(frozen=True)
class StrategyConfig:
    type_filter: frozenset[str] = frozenset({t.value for t in MatchType})
    threshold: float = 1 / 3
    bookmaker: str = "Pinnacle"

    def validate(self) -> None:
        if not (1 / 3 <= self.threshold <= 1.0):
            raise ValueError("threshold must lie in [1/3, 1]")
        if self.bookmaker != BEST_ODDS and self.bookmaker not in BOOKMAKERS:
            raise ValueError(f"unknown bookmaker {self.bookmaker!r}")
        unknown = self.type_filter - {t.value for t in MatchType}
        if unknown:
            raise ValueError(f"unknown match types {sorted(unknown)}")


@dataclass(frozen=True)
class BetEntry:
    match_key: MatchKey
    bookmaker: str
    backed: Result
    odds: float
    stake: float
    profit: float


@dataclass
class BetLedger:
    entries: list[BetEntry] = field(default_factory=list)
    skipped: list[tuple[MatchKey, str]] = field(default_factory=list)

    @property
    def staked(self) -> float:
        return float(sum(e.stake for e in self.entries))

    @property
    def profit(self) -> float:
        return float(sum(e.profit for e in self.entries))

    @property
    def returned(self) -> float:
        # Defined as staked plus profit so conservation is exact in floats.
        return self.staked + self.profit

    @property
    def roi(self) -> float | None:
        staked = self.staked
        if staked == 0:
            return None
        return self.profit / staked

    def cumulative_roi(self) -> list[float]:
        out, staked, profit = [], 0.0, 0.0
        for e in self.entries:
            staked += e.stake
            profit += e.profit
            out.append(profit / staked)
        return out


def _pick_odds(board: OddsBoard, backed: Result, bookmaker: str) -> tuple[str, float] | None:
    if bookmaker == BEST_ODDS:
        best = None
        for label in BOOKMAKERS:
            triple = board.per_bookmaker.get(label)
            if triple is not None and (best is None or triple[backed.index] > best[1]):
                best = (label, triple[backed.index])
        return best
    triple = board.per_bookmaker.get(bookmaker)
    if triple is None:
        return None
    return (bookmaker, triple[backed.index])


def simulate(outcomes: list[PredictionOutcome],
             boards: dict[MatchKey, OddsBoard],
             types: dict[MatchKey, MatchType],
             strategy: StrategyConfig) -> BetLedger:
    """Fold a chronological prediction list into a bet ledger.

    Matches failing the filter or threshold, and matches without odds
    from the selected bookmaker, are recorded as skipped with reasons;
    odds are never fabricated.
    """
    strategy.validate()
    ledger = BetLedger()
    for outcome in outcomes:
        key = outcome.match_key
        match_type = types.get(key)
        if match_type is None or match_type.value not in strategy.type_filter:
            ledger.skipped.append((key, "type filtered"))
            continue
        if outcome.confidence < strategy.threshold:
            ledger.skipped.append((key, "below confidence threshold"))
            continue
        board = boards.get(key)
        if board is None:
            ledger.skipped.append((key, "no odds board"))
            continue
        picked = _pick_odds(board, outcome.predicted, strategy.bookmaker)
        if picked is None:
            ledger.skipped.append((key, f"no odds from {strategy.bookmaker}"))
            continue
        label, odds = picked
        profit = odds - 1.0 if outcome.predicted == outcome.actual else -1.0
        ledger.entries.append(BetEntry(
            match_key=key, bookmaker=label, backed=outcome.predicted,
            odds=odds, stake=1.0, profit=profit))
    return ledger


# ---------------------------------------------------------------------------
# Blanket ROI table (one row per bookmaker, one column per type)

BASELINE_COLUMN = "Baseline"


def blanket_roi(outcomes_by_type: dict[str, list[PredictionOutcome]],
                boards: dict[MatchKey, OddsBoard],
                types: dict[MatchKey, MatchType]) -> dict[str, dict[str, float | None]]:
    """Bet-every-match ROI per (bookmaker, type column).

    ``outcomes_by_type`` maps each type column (Type1/2/3 plus the
    all-match Baseline) to the predictions of that column's best model.
    """
    table: dict[str, dict[str, float | None]] = {}
    for book in BOOKMAKERS:
        table[book] = {}
        for column, outcomes in outcomes_by_type.items():
            type_filter = (frozenset({t.value for t in MatchType})
                           if column == BASELINE_COLUMN else frozenset({column}))
            strategy = StrategyConfig(type_filter=type_filter, threshold=1 / 3,
                                      bookmaker=book)
            table[book][column] = simulate(outcomes, boards, types, strategy).roi
    return table


def match_counts(outcomes_by_type: dict[str, list[PredictionOutcome]]) -> dict[str, int]:
    return {column: len(outs) for column, outs in outcomes_by_type.items()}


# ---------------------------------------------------------------------------
# Upsets and bookmaker agreement

def detect_upsets(outcomes: list[PredictionOutcome],
                  boards: dict[MatchKey, OddsBoard],
                  types: dict[MatchKey, MatchType]) -> dict[str, dict[str, float | None]]:
    """Upset rate per (type, bookmaker) plus a pooled "all" rate.

    An upset requires the model to be right while the actual outcome
    carried the book's strictly highest odds (its least-favored result).
    """
    counts: dict[str, dict[str, list[int]]] = {}
    for outcome in outcomes:
        board = boards.get(outcome.match_key)
        match_type = types.get(outcome.match_key)
        if board is None or match_type is None:
            continue
        per_type = counts.setdefault(match_type.value, {})
        for book, triple in board.per_bookmaker.items():
            actual_odds = triple[outcome.actual.index]
            strictly_max = all(actual_odds > o for i, o in enumerate(triple)
                               if i != outcome.actual.index)
            upset = outcome.correct and strictly_max
            bucket = per_type.setdefault(book, [0, 0])
            bucket[0] += int(upset)
            bucket[1] += 1
    return _rate_table(counts)


def agreement_rate(outcomes: list[PredictionOutcome],
                   boards: dict[MatchKey, OddsBoard],
                   types: dict[MatchKey, MatchType]) -> dict[str, dict[str, float | None]]:
    """Share of matches where the model pick is the book's favorite.

    Ties in a book's lowest odds count as agreement when the model's
    pick is among the tied outcomes.
    """
    counts: dict[str, dict[str, list[int]]] = {}
    for outcome in outcomes:
        board = boards.get(outcome.match_key)
        match_type = types.get(outcome.match_key)
        if board is None or match_type is None:
            continue
        per_type = counts.setdefault(match_type.value, {})
        for book, triple in board.per_bookmaker.items():
            lowest = min(triple)
            agree = triple[outcome.predicted.index] == lowest
            bucket = per_type.setdefault(book, [0, 0])
            bucket[0] += int(agree)
            bucket[1] += 1
    return _rate_table(counts)


def _rate_table(counts) -> dict[str, dict[str, float | None]]:
    table: dict[str, dict[str, float | None]] = {}
    for type_label in sorted(counts):
        row: dict[str, float | None] = {}
        hits = matches = 0
        for book in BOOKMAKERS:
            bucket = counts[type_label].get(book)
            row[book] = None if bucket is None else bucket[0] / bucket[1]
            if bucket:
                hits += bucket[0]
                matches += bucket[1]
        row["all"] = hits / matches if matches else None
        table[type_label] = row
    return table


# ---------------------------------------------------------------------------
# CSV export

def boards_by_key(records: list[MatchRecord]) -> dict[MatchKey, OddsBoard]:
    return {rec.key: rec.odds for rec in records}


def write_ledger_csv(ledger: BetLedger, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["season", "date", "home", "away", "bookmaker",
                         "backed", "odds", "stake", "profit"])
        for e in ledger.entries:
            writer.writerow([*e.match_key, e.bookmaker, e.backed.value,
                             repr(e.odds), repr(e.stake), repr(e.profit)])


def write_trajectory_csv(ledger: BetLedger, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bet_index", "season", "date", "home", "away",
                         "cumulative_roi"])
        for i, (entry, roi) in enumerate(zip(ledger.entries, ledger.cumulative_roi()), 1):
            writer.writerow([i, *entry.match_key, repr(roi)])


def format_roi(value: float | None) -> str:
    return "NA" if value is None else repr(value)


def write_blanket_csv(table: dict[str, dict[str, float | None]],
                      counts: dict[str, int], path: str | Path) -> None:
    columns = list(counts)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bookmaker", *columns])
        writer.writerow(["match_number", *[counts[c] for c in columns]])
        for book in BOOKMAKERS:
            writer.writerow([book, *[format_roi(table[book][c]) for c in columns]])


def write_rate_csv(table: dict[str, dict[str, float | None]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["type", *BOOKMAKERS, "all"])
        for type_label, row in table.items():
            writer.writerow([type_label]
                            + [format_roi(row.get(b)) for b in BOOKMAKERS]
                            + [format_roi(row.get("all"))])
