"""Exception types raised across the library.

Everything derives from ValueError so callers that only care about
"bad input" can catch one base class, while the CLI and tests can
distinguish the specific failure.
"""


class EmptyGraphError(ValueError):
    """Raised when a quantity is undefined on a graph with no users or objects."""


class EmptyDatasetError(ValueError):
    """Raised when ingestion produces zero usable interaction records."""


class ColdStartError(ValueError):
    """Raised when scoring is requested for a user with no collected objects."""


class EmptyEvaluationError(ValueError):
    """Raised when a metric has no qualifying users or links to average over."""


class EmptySweepError(ValueError):
    """Raised when an optimum is requested from a sweep with no successful points."""


class OracleCapError(ValueError):
    """Raised when a dense transfer matrix is requested above the size cap."""


class SplitCorruptionError(ValueError):
    """Raised when a split file cannot be parsed or fails its checksum."""


class SplitValidationError(ValueError):
    """Raised when a parsed split file violates a structural invariant."""
