"""Exception types shared across the package."""


class SosimError(Exception):
    """Base class for all package errors."""


class ConfigError(SosimError):
    """Invalid configuration (bad source spec, empty trace, bad experiment)."""


class ParseError(ConfigError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class ValidationError(SosimError):
    """Argument or data violates a stated contract (negative delay, bad split...)."""


class DomainError(SosimError):
    """Numeric argument outside its mathematical domain."""


class NoDataError(SosimError):
    """A statistic was requested from an empty sample window."""


class DegenerateInputError(SosimError):
    """Optimizer input admits no meaningful solution (zero-delay path)."""


class InfeasibleError(SosimError):
    """Requested quantity does not exist for the given data."""


class UndefinedSizeError(SosimError):
    """Receive-buffer size is undefined (some path has zero mean delay)."""


class UsageError(SosimError):
    """Bad CLI/sweep usage (wrong axis, empty value list...)."""
