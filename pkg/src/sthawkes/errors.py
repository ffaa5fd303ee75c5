"""Exception hierarchy shared across the package.

The three top-level families map onto CLI exit codes: configuration
problems exit 1, data problems exit 2, numerical failures exit 3.
"""


class STHawkesError(Exception):
    """Base class for all package errors."""


class ConfigError(STHawkesError):
    """Invalid configuration: bad hyperparameters, unknown keys, bad model kind."""


class DataError(STHawkesError):
    """Invalid event data: out-of-range types, locations outside the domain."""


class ParseError(DataError):
    """Malformed CSV input. Carries the offending 1-based data row number."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class NumericalError(STHawkesError):
    """Numerical failure: intensity below the positivity floor, divergence."""


class TrainingError(NumericalError):
    """Training diverged. Carries the last finite fit report, if any."""

    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)
