import numpy as np
import pytest

from matchcast.features import (FEATURE_COLUMNS, PERCENTAGE_COLUMNS,
                                build_features, pca_fit, pca_project)
from matchcast.ingest import Result
from matchcast.kelly import f99
from matchcast.ratings import elo_probabilities

# ---------------------------------------------------------------------------
# PCA


def test_collinear_triples_fully_explained():
    direction = np.ones(3) / np.sqrt(3)
    rows = [t * direction for t in np.linspace(-2, 2, 9)]
    model = pca_fit(rows)
    assert model.explained_variance_ratio == pytest.approx(1.0, abs=1e-12)
    assert np.asarray(model.axis) == pytest.approx(direction, abs=1e-9)


def test_isotropic_cloud_explains_one_third():
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(20000, 3))
    model = pca_fit(rows)
    assert model.explained_variance_ratio == pytest.approx(1 / 3, abs=0.02)


def test_axis_matches_eigendecomposition_oracle():
    rng = np.random.default_rng(4)
    rows = rng.normal(size=(500, 3)) @ np.diag([3.0, 1.0, 0.3])
    model = pca_fit(rows)
    cov = np.cov(np.asarray(rows).T, ddof=1)
    values, vectors = np.linalg.eigh(cov)
    oracle = vectors[:, np.argmax(values)]
    if oracle[np.flatnonzero(np.abs(oracle) > 1e-12)[0]] < 0:
        oracle = -oracle
    assert np.asarray(model.axis) == pytest.approx(oracle, abs=1e-6)
    assert model.explained_variance_ratio == pytest.approx(
        values.max() / values.sum(), abs=1e-9)


def test_sign_convention_survives_mirroring():
    rng = np.random.default_rng(5)
    rows = rng.normal(size=(200, 3)) @ np.diag([2.0, 1.0, 0.5])
    a = pca_fit(rows)
    b = pca_fit(-rows)
    assert np.asarray(a.axis) == pytest.approx(np.asarray(b.axis), abs=1e-9)


def test_projection_contract():
    rng = np.random.default_rng(6)
    rows = rng.normal(size=(300, 3)) @ np.diag([2.5, 0.7, 0.2])
    model = pca_fit(rows)
    assert pca_project(model, model.mean) == pytest.approx(0.0, abs=1e-12)
    shifted = np.asarray(model.mean) + np.asarray(model.axis)
    assert pca_project(model, shifted) == pytest.approx(1.0, abs=1e-9)
    # Projected training variance equals the leading eigenvalue.
    projections = [pca_project(model, r) for r in rows]
    cov = np.cov(np.asarray(rows).T, ddof=1)
    top = np.linalg.eigvalsh(cov).max()
    assert np.var(projections, ddof=1) == pytest.approx(top, rel=1e-9)


def test_zero_variance_falls_back():
    model = pca_fit([(0.4, 0.3, 0.3)] * 5)
    assert model.explained_variance_ratio == 0.0
    assert model.axis == (1.0, 0.0, 0.0)


def test_single_row_rejected():
    with pytest.raises(ValueError):
        pca_fit([(0.3, 0.3, 0.4)])


# ---------------------------------------------------------------------------
# Feature assembly on synthetic leagues


@pytest.fixture(scope="module")
def built(small_league):
    return build_features(small_league)


def test_rows_cover_post_warmup_matches(built, small_league):
    assert built.rows, "expected feature rows after warm-up"
    first_season = small_league[0].season_id
    assert all(r.season_id != first_season for r in built.rows)
    assert len(built.rows) + len(built.skipped) == len(small_league)
    assert all(set(r.values) == set(FEATURE_COLUMNS) for r in built.rows)


def test_skips_carry_reasons(built):
    assert all(reason for _key, reason in built.skipped)


def test_percentage_features_bounded(built):
    for row in built.rows:
        for name in PERCENTAGE_COLUMNS:
            assert 0.0 <= row.values[name] <= 1.0, (row.key, name)


def test_odds_probabilities_sum_to_one(built):
    for row in built.rows:
        total = (row.values["AvgHOddPro"] + row.values["AvgDOddPro"]
                 + row.values["AvgAOddPro"])
        assert total == pytest.approx(1.0, abs=1e-9)


def test_odds_probability_of_fair_average_board():
    from tests.conftest import make_record
    from matchcast.features import _odds_probabilities
    rec = make_record(average=(2.0, 3.0, 6.0))
    assert _odds_probabilities(rec) == pytest.approx((0.5, 1 / 3, 1 / 6), abs=1e-12)
    assert f99((2.0, 3.0, 6.0)) == 1.0


def test_elo_probability_features_consistent(built):
    for row in built.rows[::7]:
        probs = elo_probabilities(row.values["HomeELO"], row.values["AwayELO"])
        assert row.values["ELOHomeW"] == pytest.approx(probs.p_home, abs=1e-12)
        assert row.values["ELOAwayW"] == pytest.approx(probs.p_away, abs=1e-12)
        assert row.values["ELODraw"] == pytest.approx(probs.p_draw, abs=1e-12)


def test_sta_features_are_two_value_deviations(built):
    for row in built.rows[::11]:
        assert row.values["ELOsta"] == pytest.approx(
            abs(row.values["HomeELO"] - row.values["AwayELO"]) / 2, abs=1e-12)
        assert row.values["Offsta"] == pytest.approx(
            row.values["HomeOff"] - row.values["AwayOff"], abs=1e-12)
        assert row.values["PointDiff"] == pytest.approx(
            row.values["HomeTeamPoint"] - row.values["AwayTeamPoint"], abs=1e-12)


def test_percentages_match_count_based_recomputation(tiny_league):
    build = build_features(tiny_league)
    for row in build.rows[:40]:
        prior = [m for m in tiny_league
                 if m.round_date.isoformat() < row.round_date]
        home = row.home_team
        played = [m for m in prior if home in (m.home_team, m.away_team)]
        wins = sum(1 for m in played
                   if (m.home_team == home and m.ft_result is Result.HOME_WIN)
                   or (m.away_team == home and m.ft_result is Result.AWAY_WIN))
        assert row.values["HomeWin"] == pytest.approx(wins / len(played))
        at_home = [m for m in played if m.home_team == home]
        home_wins = sum(1 for m in at_home if m.ft_result is Result.HOME_WIN)
        home_draws = sum(1 for m in at_home if m.ft_result is Result.DRAW)
        assert row.values["HomeHWin"] == pytest.approx(home_wins / len(at_home))
        assert row.values["HomeHDraw"] == pytest.approx(home_draws / len(at_home))
        last_season_id = f"S{int(row.season_id[1:]) - 1:02d}"
        ls = [m for m in tiny_league if m.season_id == last_season_id
              and home in (m.home_team, m.away_team)]
        ls_wins = sum(1 for m in ls
                      if (m.home_team == home and m.ft_result is Result.HOME_WIN)
                      or (m.away_team == home and m.ft_result is Result.AWAY_WIN))
        assert row.values["LSHW"] == pytest.approx(ls_wins / len(ls))


def test_streak_features_match_recomputation(tiny_league):
    from matchcast.ratings import streak, weighted_streak
    build = build_features(tiny_league)
    for row in build.rows[:25]:
        home = row.home_team
        scores = []
        for m in tiny_league:
            if m.round_date.isoformat() >= row.round_date:
                break
            if home == m.home_team:
                scores.append({"H": 3, "D": 1, "A": 0}[m.ft_result.value])
            elif home == m.away_team:
                scores.append({"H": 0, "D": 1, "A": 3}[m.ft_result.value])
        assert row.values["StreakH"] == pytest.approx(streak(scores, 6))
        assert row.values["WStreakH"] == pytest.approx(weighted_streak(scores, 6))


# ---------------------------------------------------------------------------
# Anti-leakage: truncating at a row's date and rebuilding reproduces it.


def test_truncation_replay_reproduces_rows(small_league):
    full = build_features(small_league)
    probe_rows = full.rows[:: max(1, len(full.rows) // 12)]
    for probe in probe_rows:
        truncated = [m for m in small_league
                     if m.round_date.isoformat() <= probe.round_date]
        replay = build_features(truncated)
        matching = [r for r in replay.rows if r.key == probe.key]
        assert len(matching) == 1
        assert matching[0].values == probe.values
        assert matching[0].label is probe.label


def test_deleting_future_matches_never_changes_past_rows(small_league):
    full = build_features(small_league)
    cut = small_league[int(len(small_league) * 0.6)].round_date
    truncated = [m for m in small_league if m.round_date < cut]
    partial = build_features(truncated)
    partial_by_key = {r.key: r for r in partial.rows}
    for row in full.rows:
        if row.round_date < cut.isoformat():
            assert partial_by_key[row.key].values == row.values
