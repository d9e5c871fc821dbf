"""Batch stages wired together by the CLI: each one reads the previous
stage's files from the output directory and writes its own, plus a
manifest with the config hash, seed, stage version and input digests."""

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import betting, evaluation, features, ingest, kelly, ratings
from .config import config_hash
from .errors import DatasetError, ProtocolError
from .ingest import CsvSchema, MatchRecord
from .kelly import OverOneRule
from .models import PredictionOutcome
from .ratings import EloConfig

log = logging.getLogger(__name__)

STAGE_VERSIONS = {
    "ingest": ingest.STAGE_VERSION,
    "featurize": features.STAGE_VERSION,
    "kelly": kelly.STAGE_VERSION,
    "train": evaluation.STAGE_VERSION,
    "evaluate": evaluation.STAGE_VERSION,
    "bet": betting.STAGE_VERSION,
    "report": 1,
}

RUN_STAGES = ("featurize", "kelly", "train", "evaluate", "bet", "report")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir: Path, stage: str, cfg: dict, inputs: list[Path]) -> None:
    manifest = {
        "stage": stage,
        "stage_version": STAGE_VERSIONS[stage],
        "stage_versions": STAGE_VERSIONS,
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
        "inputs": {p.name: _sha256(p) for p in sorted(inputs)},
    }
    path = outdir / f"{stage}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Stage: ingest

def stage_ingest(cfg: dict, outdir: Path,
                 csv_paths: list[str] | None = None) -> Path:
    outdir.mkdir(parents=True, exist_ok=True)
    synthetic = cfg["data"]["synthetic"]
    paths = csv_paths if csv_paths else cfg["data"]["csv_paths"]
    reports = []
    records: list[MatchRecord] = []
    inputs: list[Path] = []
    if synthetic is not None:
        records = ingest.synthesize_league(int(synthetic["teams"]),
                                           int(synthetic["seasons"]),
                                           int(synthetic["seed"]))
        reports.append({"path": "<synthetic>", "accepted": len(records), "rejected": []})
    elif paths:
        schema_cfg = cfg["data"]["schema"]
        for path in paths:
            schema = CsvSchema.from_config(schema_cfg)
            recs, report = ingest.parse_season_csv(path, schema)
            records.extend(recs)
            reports.append(report.to_dict())
            inputs.append(Path(path))
    else:
        raise DatasetError("no input: configure data.csv_paths or data.synthetic")

    records.sort(key=lambda r: r.round_date)
    matches_path = outdir / "matches.jsonl"
    ingest.write_records_jsonl(records, matches_path)
    with open(outdir / "ingest_report.json", "w", encoding="utf-8") as fh:
        json.dump({"files": reports,
                   "accepted": sum(r["accepted"] for r in reports),
                   "rejected": sum(len(r["rejected"]) for r in reports)},
                  fh, sort_keys=True, indent=2)
        fh.write("\n")
    write_manifest(outdir, "ingest", cfg, inputs)
    return matches_path


# ---------------------------------------------------------------------------
# Stage: featurize

def stage_featurize(cfg: dict, outdir: Path) -> Path:
    records = ingest.read_records_jsonl(outdir / "matches.jsonl")
    elo_cfg = EloConfig(**cfg["elo"])
    build = features.build_features(records, elo_cfg)

    features_path = outdir / "features.csv"
    features.write_features_csv(build.rows, features_path)
    with open(outdir / "featurize_report.json", "w", encoding="utf-8") as fh:
        json.dump({"rows": len(build.rows),
                   "skipped": [{"key": list(k), "reason": r} for k, r in build.skipped]},
                  fh, sort_keys=True, indent=2)
        fh.write("\n")

    _export_rating_snapshots(records, elo_cfg, outdir / "ratings.jsonl")
    write_manifest(outdir, "featurize", cfg, [outdir / "matches.jsonl"])
    return features_path


def _export_rating_snapshots(records, elo_cfg, path: Path) -> None:
    book = ratings.RatingBook(elo_cfg)
    path.write_text("", encoding="utf-8")
    index = 0
    while index < len(records):
        date = records[index].round_date
        group = []
        while index < len(records) and records[index].round_date == date:
            group.append(records[index])
            index += 1
        for rec in group:
            book.consume(rec)
        ratings.write_snapshots_jsonl(book.snapshot_rows(date), path, append=True)


# ---------------------------------------------------------------------------
# Stage: kelly

def stage_kelly(cfg: dict, outdir: Path) -> Path:
    records = ingest.read_records_jsonl(outdir / "matches.jsonl")
    rule = OverOneRule(cfg["kelly"]["rule"])
    profiles = kelly.profile_matches(records, rule)
    kelly_path = outdir / "kelly.csv"
    kelly.write_kelly_csv(profiles, kelly_path)
    write_manifest(outdir, "kelly", cfg, [outdir / "matches.jsonl"])
    return kelly_path


# ---------------------------------------------------------------------------
# Stage: train (protocol run -> per-window predictions)

def _protocol_config(cfg: dict) -> evaluation.ProtocolConfig:
    return evaluation.ProtocolConfig(
        test_size=cfg["windows"]["test_size"],
        horizon_seasons=cfg["windows"]["horizon_seasons"],
        n_draws=cfg["models"]["n_draws"],
        elimination_rounds=cfg["models"]["elimination_rounds"],
    )


def _run_one_type(args) -> evaluation.ProtocolResult:
    rows, types_by_key, type_label, roster, seed, pcfg = args
    return evaluation.run_protocol(rows, types_by_key, (type_label,), roster,
                                   seed, pcfg)


def stage_train(cfg: dict, outdir: Path, jobs: int = 1) -> evaluation.ProtocolResult:
    rows = features.read_features_csv(outdir / "features.csv")
    profiles = kelly.read_kelly_csv(outdir / "kelly.csv")
    types_by_key = {p.match_key: p.match_type for p in profiles}
    roster = tuple(cfg["models"]["roster"])
    types = tuple(cfg["models"]["types"])
    pcfg = _protocol_config(cfg)
    seed = cfg["seed"]

    if jobs > 1 and len(types) > 1:
        tasks = [(rows, types_by_key, t, roster, seed, pcfg) for t in types]
        with ProcessPoolExecutor(max_workers=min(jobs, len(types))) as pool:
            partials = list(pool.map(_run_one_type, tasks))
        result = evaluation.ProtocolResult(types=types, roster=roster)
        for partial in partials:
            result.outcomes.update(partial.outcomes)
            result.metrics.update(partial.metrics)
            result.ranks.update(partial.ranks)
            result.histograms.update(partial.histograms)
            result.plans.update(partial.plans)
            result.diagnostics.extend(partial.diagnostics)
    else:
        result = evaluation.run_protocol(rows, types_by_key, types, roster,
                                         seed, pcfg)

    results_dir = outdir / "results"
    predictions_dir = results_dir / "predictions"
    predictions_dir.mkdir(parents=True, exist_ok=True)
    for (type_label, roster_name, window_idx), outcomes in sorted(result.outcomes.items()):
        path = predictions_dir / f"{type_label}_{roster_name}_w{window_idx}.csv"
        write_predictions_csv(outcomes, path)
    with open(results_dir / "diagnostics.json", "w", encoding="utf-8") as fh:
        json.dump(sorted(result.diagnostics), fh, indent=2)
        fh.write("\n")
    write_manifest(results_dir, "train", cfg,
                   [outdir / "features.csv", outdir / "kelly.csv"])
    return result


def write_predictions_csv(outcomes: list[PredictionOutcome], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["season", "date", "home", "away",
                         "conf_home", "conf_draw", "conf_away",
                         "predicted", "actual", "model"])
        for o in outcomes:
            writer.writerow([*o.match_key,
                             repr(o.confidences[0]), repr(o.confidences[1]),
                             repr(o.confidences[2]),
                             o.predicted.value, o.actual.value, o.model_id])


def read_predictions_csv(path: Path) -> list[PredictionOutcome]:
    from .ingest import Result
    outcomes = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            outcomes.append(PredictionOutcome(
                match_key=(row["season"], row["date"], row["home"], row["away"]),
                confidences=(float(row["conf_home"]), float(row["conf_draw"]),
                             float(row["conf_away"])),
                predicted=Result(row["predicted"]),
                actual=Result(row["actual"]),
                model_id=row["model"],
            ))
    return outcomes


def load_predictions(outdir: Path) -> dict[tuple[str, str, int], list[PredictionOutcome]]:
    predictions_dir = outdir / "results" / "predictions"
    loaded = {}
    for path in sorted(predictions_dir.glob("*.csv")):
        # <type>_<roster name, may contain underscores>_w<idx>
        parts = path.stem.split("_")
        type_label = parts[0]
        widx = int(parts[-1][1:])
        roster_name = "_".join(parts[1:-1])
        loaded[(type_label, roster_name, widx)] = read_predictions_csv(path)
    return loaded


# ---------------------------------------------------------------------------
# Stage: evaluate (metrics, ranks, confidence histogram from predictions)

def stage_evaluate(cfg: dict, outdir: Path) -> None:
    loaded = load_predictions(outdir)
    if not loaded:
        raise ProtocolError("no predictions found; run the train stage first")
    results_dir = outdir / "results"

    metrics_rows = []
    by_type_algo: dict[tuple[str, str], list[PredictionOutcome]] = {}
    accs: dict[str, dict[str, dict[int, float]]] = {}
    for (type_label, roster_name, widx), outcomes in sorted(loaded.items()):
        report = evaluation.compute_metrics(outcomes, f"{type_label}-w{widx}", roster_name)
        metrics_rows.append((type_label, roster_name, widx, report))
        by_type_algo.setdefault((type_label, roster_name), []).extend(outcomes)
        accs.setdefault(type_label, {}).setdefault(roster_name, {})[widx] = report.accuracy

    with open(results_dir / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["type", "algorithm", "window", "accuracy",
                         "weighted_precision", "macro_recall", "f1", "confusion"])
        for type_label, roster_name, widx, report in metrics_rows:
            writer.writerow([type_label, roster_name, widx,
                             repr(report.accuracy), repr(report.weighted_precision),
                             repr(report.macro_recall), repr(report.f1),
                             json.dumps(report.confusion)])

    with open(results_dir / "ranks.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["type", "algorithm", "mean_rank", "mean_accuracy"])
        for type_label, per_algo in sorted(accs.items()):
            windows = set.intersection(*[set(w) for w in per_algo.values()])
            if not windows:
                continue
            table = {a: [per_algo[a][w] for w in sorted(windows)] for a in per_algo}
            ranks = evaluation.rank_algorithms(table)
            for name in sorted(ranks, key=lambda a: ranks[a]):
                mean_acc = sum(table[name]) / len(table[name])
                writer.writerow([type_label, name, repr(ranks[name]), repr(mean_acc)])

    with open(results_dir / "confidence_histogram.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        bins = [f"{lo:.2f}-{hi:.2f}" for lo, hi in evaluation.CONFIDENCE_BINS]
        writer.writerow(["type", "algorithm", *bins, "total"])
        for (type_label, roster_name), outcomes in sorted(by_type_algo.items()):
            hist = evaluation.confidence_histogram(outcomes)
            writer.writerow([type_label, roster_name,
                             *[hist[b] for b in bins], len(outcomes)])

    write_manifest(results_dir, "evaluate", cfg, [results_dir / "metrics.csv"])


def best_models_by_type(outdir: Path) -> dict[str, str]:
    """Best mean-accuracy roster entry per type from ranks.csv."""
    best: dict[str, tuple[float, str]] = {}
    with open(outdir / "results" / "ranks.csv", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["algorithm"].startswith("baseline"):
                continue
            acc = float(row["mean_accuracy"])
            current = best.get(row["type"])
            if current is None or acc > current[0]:
                best[row["type"]] = (acc, row["algorithm"])
    return {t: name for t, (_, name) in best.items()}


# ---------------------------------------------------------------------------
# Stage: bet

def stage_bet(cfg: dict, outdir: Path) -> None:
    records = ingest.read_records_jsonl(outdir / "matches.jsonl")
    profiles = kelly.read_kelly_csv(outdir / "kelly.csv")
    boards = betting.boards_by_key(records)
    types_by_key = {p.match_key: p.match_type for p in profiles}
    loaded = load_predictions(outdir)
    best = best_models_by_type(outdir)

    bets_dir = outdir / "betting"
    bets_dir.mkdir(parents=True, exist_ok=True)

    def merged(type_label: str, roster_name: str) -> list[PredictionOutcome]:
        outs = []
        for (t, a, w) in sorted(loaded):
            if t == type_label and a == roster_name:
                outs.extend(loaded[(t, a, w)])
        return outs

    outcomes_by_column: dict[str, list[PredictionOutcome]] = {}
    for type_label in ("Type1", "Type2", "Type3"):
        if type_label in best:
            outcomes_by_column[type_label] = merged(type_label, best[type_label])
    if "All" in best:
        outcomes_by_column[betting.BASELINE_COLUMN] = merged("All", best["All"])

    if outcomes_by_column:
        table = betting.blanket_roi(outcomes_by_column, boards, types_by_key)
        betting.write_blanket_csv(table, betting.match_counts(outcomes_by_column),
                                  bets_dir / "blanket_roi.csv")

    all_outcomes = [o for outs in outcomes_by_column.values() for o in outs]
    if all_outcomes:
        betting.write_rate_csv(betting.detect_upsets(all_outcomes, boards, types_by_key),
                               bets_dir / "upsets.csv")
        betting.write_rate_csv(betting.agreement_rate(all_outcomes, boards, types_by_key),
                               bets_dir / "agreement.csv")

    bookmaker = cfg["betting"]["bookmaker"]
    for type_label in ("Type1", "Type2", "Type3"):
        outcomes = outcomes_by_column.get(type_label)
        if not outcomes:
            continue
        for tau in cfg["betting"]["thresholds"]:
            strategy = betting.StrategyConfig(type_filter=frozenset({type_label}),
                                              threshold=tau, bookmaker=bookmaker)
            ledger = betting.simulate(outcomes, boards, types_by_key, strategy)
            tag = f"{type_label}_tau{tau:.2f}"
            betting.write_ledger_csv(ledger, bets_dir / f"ledger_{tag}.csv")
            betting.write_trajectory_csv(ledger, bets_dir / f"trajectory_{tag}.csv")

    write_manifest(bets_dir, "bet", cfg,
                   [outdir / "matches.jsonl", outdir / "kelly.csv"])


# ---------------------------------------------------------------------------
# Stage: report

def stage_report(cfg: dict, outdir: Path) -> None:
    report_dir = outdir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    summary: dict = {"best_models": {}, "final_roi": {}}
    ranks_path = outdir / "results" / "ranks.csv"
    if ranks_path.exists():
        summary["best_models"] = best_models_by_type(outdir)
    bets_dir = outdir / "betting"
    for path in sorted(bets_dir.glob("trajectory_*.csv")) if bets_dir.exists() else []:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        summary["final_roi"][path.stem.replace("trajectory_", "")] = (
            float(rows[-1]["cumulative_roi"]) if rows else None)
    with open(report_dir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    write_manifest(report_dir, "report", cfg, [])


STAGE_FUNCS = {
    "featurize": stage_featurize,
    "kelly": stage_kelly,
    "evaluate": stage_evaluate,
    "bet": stage_bet,
    "report": stage_report,
}


def run_stages(cfg: dict, outdir: Path, stage: str | None = None,
               jobs: int = 1) -> None:
    """Execute the pipeline (or a single stage) over normalized data."""
    if not (outdir / "matches.jsonl").exists():
        raise DatasetError("matches.jsonl not found; run the ingest stage first")
    stages = RUN_STAGES if stage is None else (stage,)
    for name in stages:
        log.info("running stage %s", name)
        if name == "train":
            stage_train(cfg, outdir, jobs=jobs)
        elif name in STAGE_FUNCS:
            STAGE_FUNCS[name](cfg, outdir)
        else:
            raise ProtocolError(f"unknown stage {name!r}")
