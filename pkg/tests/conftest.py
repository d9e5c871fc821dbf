import datetime as dt

import numpy as np
import pytest

from matchcast.features import FeatureVector
from matchcast.ingest import (MatchRecord, MatchStats, OddsBoard, Result,
                              RESULT_ORDER, synthesize_league)


def rows_from_xy(x, y, names) -> list[FeatureVector]:
    """Wrap a plain matrix as feature rows for the model contract."""
    x = np.asarray(x, dtype=float)
    rows = []
    for i in range(x.shape[0]):
        rows.append(FeatureVector(
            season_id="S01",
            round_date=f"2001-01-01#{i:05d}",
            home_team=f"h{i}",
            away_team=f"a{i}",
            values={name: float(v) for name, v in zip(names, x[i])},
            label=RESULT_ORDER[int(y[i])],
        ))
    return rows


def make_record(season="S01", date=dt.date(2001, 8, 4), home="alpha", away="beta",
                ft=(2, 1), ht=(1, 0), books=None, average=(2.0, 3.4, 4.0),
                shots=(12, 8), on_target=(5, 3), corners=(6, 4), fouls=(10, 12),
                yellows=(1, 2), reds=(0, 0)) -> MatchRecord:
    record = MatchRecord(
        season_id=season,
        round_date=date,
        home_team=home,
        away_team=away,
        ft_home_goals=ft[0],
        ft_away_goals=ft[1],
        ft_result=Result.from_goals(*ft),
        ht_home_goals=ht[0],
        ht_away_goals=ht[1],
        ht_result=Result.from_goals(*ht),
        stats=MatchStats(shots=shots, shots_on_target=on_target, corners=corners,
                         fouls=fouls, yellow_cards=yellows, red_cards=reds),
        odds=OddsBoard(per_bookmaker=books or {"Bet365": (2.1, 3.3, 3.9)},
                       average=average),
    )
    record.validate()
    return record


@pytest.fixture(scope="session")
def small_league():
    """10 teams, 4 seasons: enough history for feature warm-up."""
    return synthesize_league(10, 4, seed=11)


@pytest.fixture(scope="session")
def predictable_league():
    """Wider strength spread: matches carry a strong learnable signal."""
    from matchcast.ingest import LeagueParams
    return synthesize_league(10, 4, seed=13,
                             params=LeagueParams(strength_sd=0.5))


@pytest.fixture(scope="session")
def tiny_league():
    """4 teams, 3 seasons: exhaustive checks stay cheap."""
    return synthesize_league(4, 3, seed=5)
