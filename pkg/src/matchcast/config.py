"""Pipeline configuration: one versioned JSON tree drives every stage.

The file format is documented in the README. Unknown keys are rejected
so typos fail loudly; the canonical hash of the validated tree is
recorded in every output manifest.
"""

import copy
import hashlib
import json
from pathlib import Path

from .errors import ConfigError
from .kelly import OverOneRule
from .models import Algorithm
from .ratings import EloConfig

CONFIG_VERSION = 1

DEFAULT_ROSTER = (
    Algorithm.LOGISTIC_REGRESSION.value,
    Algorithm.DECISION_TREE.value,
    Algorithm.RANDOM_FOREST.value,
    Algorithm.GRADIENT_BOOSTING.value,
    "boosted_deep",
    Algorithm.KNN.value,
    Algorithm.VOTING_SOFT.value,
    Algorithm.VOTING_HARD.value,
    Algorithm.STACKING.value,
    Algorithm.BASELINE_UNIFORM.value,
    Algorithm.BASELINE_STRATIFIED.value,
)

DEFAULTS = {
    "config_version": CONFIG_VERSION,
    "seed": 7,
    "output_dir": "out",
    "data": {
        "csv_paths": [],
        "schema": {"columns": {}, "date_format": "dd/mm/yy"},
        "synthetic": None,  # {"teams": int, "seasons": int, "seed": int}
    },
    "elo": {
        "c": 10.0, "d": 400.0, "k0": 10.0, "gamma": 1.0,
        "initial_rating": 1000.0, "prob_scale": 10.0,
    },
    "kelly": {"rule": "max"},
    "windows": {"test_size": 25, "horizon_seasons": 2},
    "models": {
        "roster": list(DEFAULT_ROSTER),
        "n_draws": 25,
        "elimination_rounds": 10,
        "types": ["Type1", "Type2", "Type3", "All"],
        "forest_trees": 50,
    },
    "betting": {
        "bookmaker": "Pinnacle",
        "thresholds": [0.4, 0.5, 0.6, 0.7],
    },
}


def _merge(defaults: dict, overrides: dict, path: str = "") -> dict:
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key {here!r}")
        if isinstance(defaults[key], dict) and defaults[key] and value is not None:
            if not isinstance(value, dict):
                raise ConfigError(f"{here} must be a mapping")
            merged[key] = _merge(defaults[key], value, here)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: str | Path | None = None,
                overrides: dict | None = None) -> dict:
    """Read, default-fill and validate a config file (or pure defaults)."""
    tree = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            tree = json.load(fh)
    if not isinstance(tree, dict):
        raise ConfigError("config root must be a JSON object")
    # "schema.columns" and "data.synthetic" carry free-form keys.
    columns = tree.get("data", {}).get("schema", {}).get("columns")
    synthetic = tree.get("data", {}).get("synthetic")
    if "data" in tree:
        tree = copy.deepcopy(tree)
        tree["data"].get("schema", {}).pop("columns", None)
        tree["data"].pop("synthetic", None)
    cfg = _merge(DEFAULTS, tree)
    if columns is not None:
        cfg["data"]["schema"]["columns"] = columns
    cfg["data"]["synthetic"] = synthetic
    if overrides:
        for dotted, value in overrides.items():
            node = cfg
            *parents, leaf = dotted.split(".")
            for part in parents:
                node = node[part]
            node[leaf] = value
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if cfg["config_version"] != CONFIG_VERSION:
        raise ConfigError(f"unsupported config_version {cfg['config_version']!r}")
    try:
        EloConfig(**cfg["elo"]).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"elo: {exc}") from exc
    try:
        OverOneRule(cfg["kelly"]["rule"])
    except ValueError as exc:
        raise ConfigError(f"kelly.rule: {exc}") from exc
    if not 20 <= cfg["windows"]["test_size"] <= 30:
        raise ConfigError("windows.test_size must be in [20, 30]")
    horizon = cfg["windows"]["horizon_seasons"]
    if horizon is not None and horizon < 1:
        raise ConfigError("windows.horizon_seasons must be positive or null")
    known = set(DEFAULT_ROSTER)
    for name in cfg["models"]["roster"]:
        if name not in known:
            raise ConfigError(f"unknown roster entry {name!r}")
    for t in cfg["models"]["types"]:
        if t not in ("Type1", "Type2", "Type3", "All"):
            raise ConfigError(f"unknown match type {t!r}")
    for tau in cfg["betting"]["thresholds"]:
        if not 1 / 3 <= tau <= 1.0:
            raise ConfigError("betting thresholds must lie in [1/3, 1]")
    synthetic = cfg["data"]["synthetic"]
    if synthetic is not None:
        missing = {"teams", "seasons", "seed"} - set(synthetic)
        if missing:
            raise ConfigError(f"data.synthetic missing {sorted(missing)}")


def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
