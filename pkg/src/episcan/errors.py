"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2,
CalibrationRequiredError -> 3, DataError -> 4.
"""


class EpiscanError(Exception):
    """Base class for all package errors."""


class ParameterError(EpiscanError, ValueError):
    """A parameter lies outside its mathematical domain."""


class DegenerateSeriesError(EpiscanError, ValueError):
    """The series cannot support estimation (e.g. zero LSE denominator)."""


class ConfigError(EpiscanError, ValueError):
    """Cross-field configuration validation failed."""


class CalibrationRequiredError(EpiscanError, LookupError):
    """A critical-value table entry is missing or mismatched."""


class DataError(EpiscanError, ValueError):
    """Input data (CSV/JSON payload) could not be parsed or is inconsistent."""
