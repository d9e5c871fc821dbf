"""Football match outcome prediction with Kelly-index stratification and
unit-stake betting backtests."""

__version__ = "0.1.0"

from .ingest import (BOOKMAKERS, MatchRecord, MatchStats, OddsBoard, Result,
                     parse_season_csv, synthesize_league)
from .kelly import (KellyProfile, MatchType, OverOneRule, classify_match, f99,
                    kelly_indices, profile_match, profile_matches)
from .ratings import (EloConfig, OutcomeProbabilities, RatingBook,
                      elo_expectation, elo_probabilities, elo_update, odm_fit,
                      odm_new_team, streak, weighted_streak)
from .features import (FEATURE_COLUMNS, FeatureVector, PcaModel,
                       build_features, pca_fit, pca_project)
from .models import (Algorithm, ClassifierSpec, PredictionOutcome,
                     TrainedModel, feature_eliminate, fit, predict,
                     random_search)
from .evaluation import (MetricsReport, ProtocolConfig, WindowPlan,
                         compute_metrics, plan_windows, rank_algorithms,
                         run_protocol)
from .betting import (BetLedger, StrategyConfig, agreement_rate, blanket_roi,
                      detect_upsets, simulate)

__all__ = [
    "__version__",
    "BOOKMAKERS", "MatchRecord", "MatchStats", "OddsBoard", "Result",
    "parse_season_csv", "synthesize_league",
    "KellyProfile", "MatchType", "OverOneRule", "classify_match", "f99",
    "kelly_indices", "profile_match", "profile_matches",
    "EloConfig", "OutcomeProbabilities", "RatingBook", "elo_expectation",
    "elo_probabilities", "elo_update", "odm_fit", "odm_new_team", "streak",
    "weighted_streak",
    "FEATURE_COLUMNS", "FeatureVector", "PcaModel", "build_features",
    "pca_fit", "pca_project",
    "Algorithm", "ClassifierSpec", "PredictionOutcome", "TrainedModel",
    "feature_eliminate", "fit", "predict", "random_search",
    "MetricsReport", "ProtocolConfig", "WindowPlan", "compute_metrics",
    "plan_windows", "rank_algorithms", "run_protocol",
    "BetLedger", "StrategyConfig", "agreement_rate", "blanket_roi",
    "detect_upsets", "simulate",
]
