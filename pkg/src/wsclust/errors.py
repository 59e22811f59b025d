"""Exception types shared across the package."""


class WSClustError(Exception):
    """Base class for all package errors."""


class UsageError(WSClustError, ValueError):
    """Invalid arguments, e.g. a point id outside ``[0, n)``."""


class ConfigurationError(WSClustError, ValueError):
    """An oracle, dataset or sweep was configured inconsistently."""


class PreconditionError(WSClustError, ValueError):
    """An operation was called on a state that does not satisfy its requirements."""


class DegenerateMetricError(WSClustError, ValueError):
    """All points coincide, so ratios of distances are undefined."""


class ParseError(WSClustError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceeded(WSClustError):
    """Raised by a strong oracle whose hard query cap would be exceeded."""


class NoFeasibleRadius(WSClustError):
    """No radius on the search grid produced a completed carving.

    ``outcome`` holds the carving attempted at the largest grid radius.
    """

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome
