"""Command-line entry point: pipeline subcommands over one config file.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error. The
output directory resolves from --out, then the MATCHCAST_OUT environment
variable, then the config.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from . import pipeline
from .config import load_config
from .errors import ConfigError, MatchcastError, SchemaError

log = logging.getLogger("matchcast")

OUTPUT_ENV = "MATCHCAST_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchcast",
        description="Match outcome prediction and betting backtests.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress at INFO level")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest_cmd = sub.add_parser("ingest", help="normalize season CSVs or "
                                               "synthesize a league")
    ingest_cmd.add_argument("inputs", nargs="*",
                            help="season CSV paths, or key=value settings "
                                 "(teams=, seasons=, seed=) with --synthetic")
    ingest_cmd.add_argument("--synthetic", action="store_true",
                            help="generate a synthetic league instead of parsing")
    _common_args(ingest_cmd)

    run_cmd = sub.add_parser("run", help="execute the full pipeline over "
                                         "normalized data")
    run_cmd.add_argument("--stage", choices=pipeline.RUN_STAGES,
                         help="run a single stage only")
    run_cmd.add_argument("--jobs", type=int, default=1,
                         help="worker cap for per-type parallelism")
    _common_args(run_cmd)

    for name in pipeline.RUN_STAGES:
        stage_cmd = sub.add_parser(name, help=f"run only the {name} stage")
        if name == "train":
            stage_cmd.add_argument("--jobs", type=int, default=1)
        _common_args(stage_cmd)
    return parser


def _common_args(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--config", help="pipeline config JSON")
    cmd.add_argument("--out", help="output directory (overrides config and "
                                   f"the {OUTPUT_ENV} environment variable)")


def _resolve_outdir(args, cfg: dict) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env)
    return Path(cfg["output_dir"])


def _synthetic_settings(tokens: list[str]) -> dict:
    settings = {}
    for token in tokens:
        if "=" not in token:
            raise ConfigError(f"expected key=value, got {token!r}")
        key, value = token.split("=", 1)
        if key not in ("teams", "seasons", "seed"):
            raise ConfigError(f"unknown synthetic setting {key!r}")
        settings[key] = int(value)
    missing = {"teams", "seasons", "seed"} - set(settings)
    if missing:
        raise ConfigError(f"--synthetic needs {sorted(missing)}")
    return settings


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        outdir = _resolve_outdir(args, cfg)
        outdir.mkdir(parents=True, exist_ok=True)

        if args.command == "ingest":
            if args.synthetic:
                cfg["data"]["synthetic"] = _synthetic_settings(args.inputs)
                pipeline.stage_ingest(cfg, outdir)
            else:
                if not args.inputs and not cfg["data"]["csv_paths"]:
                    raise ConfigError("ingest needs CSV paths or --synthetic")
                pipeline.stage_ingest(cfg, outdir, csv_paths=args.inputs or None)
        elif args.command == "run":
            pipeline.run_stages(cfg, outdir, stage=args.stage, jobs=args.jobs)
        elif args.command == "train":
            pipeline.run_stages(cfg, outdir, stage="train", jobs=args.jobs)
        else:
            pipeline.run_stages(cfg, outdir, stage=args.command)
    except (ConfigError, SchemaError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MatchcastError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
