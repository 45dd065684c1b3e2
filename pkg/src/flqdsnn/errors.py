"""Exception types raised across the package.

Every failure mode has a named class so callers (and the CLI) can map
errors to exit codes without string matching.
"""


class FlqdsnnError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FlqdsnnError):
    """A config value is out of range or internally inconsistent."""


class UsageError(FlqdsnnError):
    """An operation was called with structurally invalid arguments."""


class ValidationError(FlqdsnnError):
    """Input data violates a documented precondition."""


class IngestionError(FlqdsnnError):
    """A CSV file could not be parsed; message carries row/column coordinates."""


class ReductionError(FlqdsnnError):
    """Dimensionality reduction is impossible for the given data."""


class SplitError(FlqdsnnError):
    """A train/test split cannot satisfy the stratification contract."""


class TrainingError(FlqdsnnError):
    """Training produced non-finite values and was aborted."""
