"""Exception taxonomy for the auditing toolkit.

Every error raised on a documented contract boundary derives from
ImputeAuditError so callers can catch the package's failures in one clause
while letting genuine bugs (TypeError and friends) propagate.
"""


class ImputeAuditError(Exception):
    """Base class for all documented failures raised by this package."""


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------


class SchemaError(ImputeAuditError):
    """CSV header or field layout does not match the declared schema."""


class ParseError(ImputeAuditError):
    """A CSV cell could not be parsed into the expected type."""


class DuplicateError(ImputeAuditError):
    """The same series id appears more than once in one dataset."""


class EmptyDatasetError(ImputeAuditError):
    """An operation that needs at least one record got an empty dataset."""


class MaskError(ImputeAuditError):
    """A mask falls outside the series or overlaps another mask."""


# ---------------------------------------------------------------------------
# signal math
# ---------------------------------------------------------------------------


class EmptyInputError(ImputeAuditError):
    """A sequence-valued argument was empty where values are required."""


class ShapeError(ImputeAuditError):
    """Array arguments have incompatible or undersized shapes."""


class ConfigError(ImputeAuditError):
    """A configuration value is out of its documented range."""


# ---------------------------------------------------------------------------
# imputers / transport
# ---------------------------------------------------------------------------


class TransportError(ImputeAuditError):
    """The remote imputer endpoint could not be reached or timed out."""


class ModelOutputError(ImputeAuditError):
    """An imputer returned output that violates the wire contract."""


class StartupError(ImputeAuditError):
    """The bundled HTTP server failed to bind or start."""


# ---------------------------------------------------------------------------
# membership inference
# ---------------------------------------------------------------------------


class DegenerateReferenceError(ImputeAuditError):
    """Reference loss is numerically zero, so the loss ratio is undefined."""


class CalibrationError(ImputeAuditError):
    """Threshold calibration got an empty or invalid score collection."""


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


class DegenerateLabelsError(ImputeAuditError):
    """Both label classes are required but only one is present."""


class DegenerateInputError(ImputeAuditError):
    """A statistic is undefined for the given input (e.g. zero variance)."""


# ---------------------------------------------------------------------------
# attribute inference / pipeline
# ---------------------------------------------------------------------------


class DegenerateAggregateError(ImputeAuditError):
    """Every window was degenerate, so no aggregate rate is defined."""


class SkippedSeriesError(ImputeAuditError):
    """A series cannot host the required disjoint mask and window layout.

    reason is a short machine-readable code ("too_short",
    "no_unseen_window") that skip counters key on.
    """

    def __init__(self, message: str, reason: str = "skipped"):
        super().__init__(message)
        self.reason = reason


class IoError(ImputeAuditError):
    """A report or sidecar file could not be written."""
