"""Exception hierarchy shared across the engine.

Every error carries a ``category`` that maps one-to-one onto the CLI exit
codes and the HTTP error envelope: usage, validation, conflict, io, oracle.
"""


class EmmError(Exception):
    """Base class; ``category`` selects the exit code / HTTP status."""

    category = "validation"


class ValidationError(EmmError):
    category = "validation"


class UsageError(EmmError):
    category = "usage"


class IoError(EmmError):
    category = "io"


class NotFoundError(IoError):
    """Unknown id or missing resource."""


class OracleError(EmmError):
    category = "oracle"


class LatticeTooLargeError(ValidationError):
    """Dense per-point storage refused; split the factor set into a
    deeper hierarchy instead of one flat node."""


class SpecFormatError(ValidationError):
    """Malformed model-spec document."""


class EvaluationError(ValidationError):
    """Model cannot be evaluated on the given answers."""
