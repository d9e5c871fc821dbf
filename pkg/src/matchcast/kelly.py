"""Kelly Indices, the market return rate, and predictability classes.

Each bookmaker's index per outcome is its odds relative to the market
average, scaled by the average book's return rate. Matches are sorted
into three classes by how many bookmakers quote an index above 1:
at least two (Type 1), exactly one (Type 2), none (Type 3).
"""

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import ClassificationError
from .ingest import BOOKMAKERS, MatchRecord

STAGE_VERSION = 1

Triple = tuple[float, float, float]


class MatchType(str, Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"


class OverOneRule(str, Enum):
    """Which of a book's three indices flags it as 'over one'."""

    MAX = "max"                    # any outcome above 1 (default)
    HOME_ONLY = "home-only"        # home index only
    FAVORITE = "favorite-outcome"  # the book's lowest-odds outcome


def f99(avg_odds: Triple) -> float:
    """Return rate of the average odds triple: 1 over the implied sum.

    Computed in product form, which is algebraically identical to the
    reciprocal-sum definition but exact for fair integer books, e.g.
    f99((2, 3, 6)) == 1.0 without rounding residue.
    """
    h, d, a = avg_odds
    if h <= 1.0 or d <= 1.0 or a <= 1.0:
        raise ValueError("all odds must exceed 1.0")
    return (h * d * a) / (d * a + h * a + h * d)


def kelly_indices(book_odds: Triple, avg_odds: Triple) -> Triple:
    """Per-outcome Kelly Indices of one bookmaker against the market."""
    rate = f99(avg_odds)
    if any(o <= 1.0 for o in book_odds):
        raise ValueError("all odds must exceed 1.0")
    return tuple(book / avg * rate for book, avg in zip(book_odds, avg_odds))


def _book_over_one(indices: Triple, book_odds: Triple, rule: OverOneRule) -> bool:
    if rule is OverOneRule.MAX:
        return max(indices) > 1.0
    if rule is OverOneRule.HOME_ONLY:
        return indices[0] > 1.0
    favorite = min(range(3), key=lambda i: (book_odds[i], i))
    return indices[favorite] > 1.0


def classify_match(profiles: dict[str, Triple],
                   book_odds: dict[str, Triple] | None = None,
                   rule: OverOneRule = OverOneRule.MAX) -> tuple[MatchType, int]:
    """Classify from per-bookmaker index triples; returns (type, count).

    The count thresholds are absolute: two or more books over one is
    Type 1, exactly one is Type 2, none is Type 3. Missing bookmakers
    simply do not contribute.
    """
    if not profiles:
        raise ClassificationError("no bookmakers present")
    if rule is OverOneRule.FAVORITE and book_odds is None:
        raise ValueError("favorite-outcome rule needs the raw book odds")
    count = 0
    for label, indices in profiles.items():
        odds = book_odds[label] if book_odds else (2.0, 2.0, 2.0)
        if _book_over_one(indices, odds, rule):
            count += 1
    if count >= 2:
        return MatchType.TYPE1, count
    if count == 1:
        return MatchType.TYPE2, count
    return MatchType.TYPE3, count


@dataclass(frozen=True)
class KellyProfile:
    match_key: tuple[str, str, str, str]
    f99: float
    per_bookmaker: dict[str, Triple]
    books_over_one: int
    match_type: MatchType


def profile_match(record: MatchRecord, rule: OverOneRule = OverOneRule.MAX) -> KellyProfile:
    """Kelly profile for one match; absent books are skipped."""
    indices = {}
    odds = {}
    for label in BOOKMAKERS:
        triple = record.odds.per_bookmaker.get(label)
        if triple is None:
            continue
        indices[label] = kelly_indices(triple, record.odds.average)
        odds[label] = triple
    match_type, count = classify_match(indices, odds, rule)
    return KellyProfile(
        match_key=record.key,
        f99=f99(record.odds.average),
        per_bookmaker=indices,
        books_over_one=count,
        match_type=match_type,
    )


def profile_matches(records: list[MatchRecord],
                    rule: OverOneRule = OverOneRule.MAX) -> list[KellyProfile]:
    return [profile_match(rec, rule) for rec in records]


# ---------------------------------------------------------------------------
# Report export

_REPORT_HEADER = (
    ["season", "date", "home", "away", "f99"]
    + [f"{BOOKMAKERS[i]}_{s}" for i in range(len(BOOKMAKERS)) for s in ("KH", "KD", "KA")]
    + ["books_over_one", "match_type"]
)


def write_kelly_csv(profiles: list[KellyProfile], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_REPORT_HEADER)
        for p in profiles:
            row = list(p.match_key) + [repr(p.f99)]
            for label in BOOKMAKERS:
                triple = p.per_bookmaker.get(label)
                row += ["", "", ""] if triple is None else [repr(v) for v in triple]
            row += [p.books_over_one, p.match_type.value]
            writer.writerow(row)


def read_kelly_csv(path: str | Path) -> list[KellyProfile]:
    profiles = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            per_book = {}
            for label in BOOKMAKERS:
                cells = [row[f"{label}_{s}"] for s in ("KH", "KD", "KA")]
                if all(cells):
                    per_book[label] = tuple(float(c) for c in cells)
            profiles.append(KellyProfile(
                match_key=(row["season"], row["date"], row["home"], row["away"]),
                f99=float(row["f99"]),
                per_bookmaker=per_book,
                books_over_one=int(row["books_over_one"]),
                match_type=MatchType(row["match_type"]),
            ))
    return profiles
