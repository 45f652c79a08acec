"""Exception types shared across the package."""


class ProbaugError(Exception):
    """Base class for package errors."""


class DataError(ProbaugError):
    """Malformed or degenerate input data."""


class ConfigError(ProbaugError):
    """Invalid configuration or schema file."""
