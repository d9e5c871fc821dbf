import datetime as dt
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchcast.errors import DatasetError, SchemaError
from matchcast.ingest import (BOOKMAKERS, CsvSchema, MatchRecord, Result,
                              normalize_team, parse_season_csv,
                              read_records_jsonl, synthesize_league,
                              write_records_csv, write_records_jsonl)

HEADER = ("Date,HomeTeam,AwayTeam,FTHG,FTAG,FTR,HTHG,HTAG,HTR,"
          "HS,AS,HST,AST,HC,AC,HF,AF,HY,AY,HR,AR,"
          "B365H,B365D,B365A,AvgH,AvgD,AvgA")


def write_csv(tmp_path, rows, header=HEADER, name="season.csv"):
    path = tmp_path / name
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")
    return path


GOOD_ROW = ("12/08/19,Arsenal,Chelsea,2,1,H,1,1,D,"
            "14,9,6,3,7,4,11,13,2,1,0,0,"
            "2.1,3.4,3.8,2.05,3.45,3.7")


def test_parse_good_row(tmp_path):
    records, report = parse_season_csv(write_csv(tmp_path, [GOOD_ROW]))
    assert report.accepted == 1 and not report.rejected
    rec = records[0]
    assert rec.ft_result is Result.HOME_WIN
    assert rec.home_team == "arsenal"
    assert rec.round_date == dt.date(2019, 8, 12)
    assert rec.odds.per_bookmaker["Bet365"] == (2.1, 3.4, 3.8)
    assert rec.odds.average == (2.05, 3.45, 3.7)


def test_inconsistent_result_rejected(tmp_path):
    bad = GOOD_ROW.replace(",2,1,H,", ",1,2,H,")
    records, report = parse_season_csv(write_csv(tmp_path, [GOOD_ROW, bad]))
    assert report.accepted == 1
    assert len(report.rejected) == 1
    row_index, reason = report.rejected[0]
    assert row_index == 3 and "inconsistent" in reason


def test_halftime_exceeding_fulltime_rejected(tmp_path):
    bad = GOOD_ROW.replace(",1,1,D,", ",3,1,H,")
    _, report = parse_season_csv(write_csv(tmp_path, [bad]))
    assert report.accepted == 0 and len(report.rejected) == 1


def test_missing_mandatory_column_names_it(tmp_path):
    header = HEADER.replace("FTR,", "XXX,")
    with pytest.raises(SchemaError, match="FTR"):
        parse_season_csv(write_csv(tmp_path, [GOOD_ROW], header=header))


def test_empty_file_rejected(tmp_path):
    with pytest.raises(DatasetError):
        parse_season_csv(write_csv(tmp_path, []))


def test_unparseable_odds_drop_the_book_only(tmp_path):
    row = GOOD_ROW.replace("2.1,3.4,3.8", "oops,3.4,3.8")
    records, report = parse_season_csv(write_csv(tmp_path, [row]))
    assert report.accepted == 1
    assert "Bet365" not in records[0].odds.per_bookmaker


def test_average_falls_back_to_book_mean(tmp_path):
    header = HEADER.replace(",AvgH,AvgD,AvgA", "")
    row = GOOD_ROW.replace(",2.05,3.45,3.7", "")
    records, _ = parse_season_csv(write_csv(tmp_path, [row], header=header))
    assert records[0].odds.average == (2.1, 3.4, 3.8)


def test_rows_sorted_by_date(tmp_path):
    later = GOOD_ROW.replace("12/08/19", "19/08/19")
    earlier = GOOD_ROW.replace("12/08/19", "05/08/19")
    records, _ = parse_season_csv(write_csv(tmp_path, [later, GOOD_ROW, earlier]))
    dates = [r.round_date for r in records]
    assert dates == sorted(dates)


def test_four_digit_year_schema(tmp_path):
    row = GOOD_ROW.replace("12/08/19", "12/08/2019")
    schema = CsvSchema(date_format="dd/mm/yyyy")
    records, _ = parse_season_csv(write_csv(tmp_path, [row]), schema)
    assert records[0].round_date == dt.date(2019, 8, 12)


def test_team_label_normalization():
    assert normalize_team("  Manchester   UNITED ") == "manchester united"


# ---------------------------------------------------------------------------
# Round trips


def test_jsonl_round_trip(tmp_path, tiny_league):
    path = tmp_path / "matches.jsonl"
    write_records_jsonl(tiny_league, path)
    assert read_records_jsonl(path) == tiny_league


def test_csv_round_trip(tmp_path, tiny_league):
    path = tmp_path / "league.csv"
    write_records_csv(tiny_league, path)
    schema = CsvSchema(date_format="dd/mm/yyyy", season_id="ignored")
    records, report = parse_season_csv(path, schema)
    assert report.accepted == len(tiny_league) and not report.rejected
    for parsed, original in zip(records, tiny_league):
        assert parsed.round_date == original.round_date
        assert parsed.home_team == original.home_team
        assert parsed.ft_result is original.ft_result
        assert parsed.odds.per_bookmaker == original.odds.per_bookmaker
        assert parsed.odds.average == pytest.approx(original.odds.average)


# ---------------------------------------------------------------------------
# Fuzzed row validation: every accepted record satisfies the invariants.

cells = st.integers(min_value=0, max_value=9)


@given(ft_h=cells, ft_a=cells, ht_h=cells, ht_a=cells,
       result=st.sampled_from("HDA"), shots=cells, on_target=cells)
@settings(max_examples=150, deadline=None)
def test_fuzzed_rows_accepted_only_when_consistent(tmp_path_factory, ft_h, ft_a,
                                                   ht_h, ht_a, result, shots,
                                                   on_target):
    tmp_path = tmp_path_factory.mktemp("fuzz")
    row = (f"12/08/19,A,B,{ft_h},{ft_a},{result},{ht_h},{ht_a},D,"
           f"{shots},9,{on_target},3,7,4,11,13,2,1,0,0,"
           "2.1,3.4,3.8,2.05,3.45,3.7")
    records, report = parse_season_csv(write_csv(tmp_path, [row]))
    if report.accepted:
        rec = records[0]
        rec.validate()
        assert Result.from_goals(rec.ft_home_goals, rec.ft_away_goals) is rec.ft_result
        assert rec.ht_home_goals <= rec.ft_home_goals
        assert rec.stats.shots_on_target[0] <= rec.stats.shots[0]
    else:
        consistent = (Result.from_goals(ft_h, ft_a).value == result
                      and ht_h == ht_a and ht_h <= ft_h and ht_a <= ft_a
                      and on_target <= shots)
        assert not consistent


# ---------------------------------------------------------------------------
# Synthetic league


def test_double_round_robin_counts(tiny_league):
    per_season = Counter(r.season_id for r in tiny_league)
    assert all(count == 12 for count in per_season.values())
    home = Counter(r.home_team for r in tiny_league if r.season_id == "S01")
    away = Counter(r.away_team for r in tiny_league if r.season_id == "S01")
    assert set(home.values()) == {3} and set(away.values()) == {3}


def test_twenty_team_season_has_380_matches():
    assert len(synthesize_league(20, 1, seed=7)) == 380


def test_generator_is_deterministic(tmp_path):
    a = synthesize_league(6, 2, seed=42)
    b = synthesize_league(6, 2, seed=42)
    assert a == b
    pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_records_jsonl(a, pa)
    write_records_jsonl(b, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_generator_output_passes_validation(small_league):
    for rec in small_league:
        rec.validate()
    dates = [r.round_date for r in small_league]
    assert dates == sorted(dates)


def test_odd_team_count_rejected():
    with pytest.raises(ValueError):
        synthesize_league(5, 1, seed=1)
    with pytest.raises(ValueError):
        synthesize_league(4, 0, seed=1)


def test_all_bookmakers_quoted(small_league):
    assert all(set(r.odds.per_bookmaker) == set(BOOKMAKERS) for r in small_league)
