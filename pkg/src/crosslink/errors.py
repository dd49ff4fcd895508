"""Exception types shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.
"""


class CrosslinkError(Exception):
    """Base class for all package errors."""


class ConfigError(CrosslinkError):
    """Invalid or inconsistent configuration."""


class DataError(CrosslinkError):
    """Malformed input data or referential-integrity violation."""


class NumericalError(CrosslinkError):
    """Numerical failure: divergence, singular matrices, etc."""
