"""Exception hierarchy shared across the pipeline stages."""


class MatchcastError(Exception):
    """Base class for all domain errors raised by this package."""


class SchemaError(MatchcastError):
    """A source file or config does not match the expected schema."""


class DatasetError(MatchcastError):
    """A dataset is unusable as a whole (empty file, no valid rows)."""


class ConfigError(MatchcastError):
    """The pipeline configuration is invalid."""


class DegenerateTeamError(MatchcastError):
    """A team's season goal record makes the offense/defense fit ill-posed."""

    def __init__(self, team: object, reason: str):
        super().__init__(f"degenerate team {team!r}: {reason}")
        self.team = team


class DegenerateNeighborsError(MatchcastError):
    """Goal-ranking neighbors coincide, so interpolation is undefined."""


class DegenerateFitError(MatchcastError):
    """A training window cannot support a model fit (e.g. single label)."""


class SpecError(MatchcastError):
    """A classifier spec names an unknown algorithm or hyperparameter."""


class InputError(MatchcastError):
    """A prediction input is missing required fields."""


class ProtocolError(MatchcastError):
    """The evaluation protocol cannot be planned or executed as requested."""


class ClassificationError(MatchcastError):
    """A Kelly profile cannot be classified (no bookmakers present)."""
