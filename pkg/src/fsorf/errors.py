"""Error types shared across the toolkit.

Validation problems (bad parameters, malformed config) and numeric
failures (non-convergent quadrature, singular chain) are kept distinct
so the CLI can map them to different exit codes.
"""


class FsorfError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(FsorfError):
    """A parameter or configuration value violates its contract."""


class NumericError(FsorfError):
    """A numerical procedure failed to converge or produced garbage."""
