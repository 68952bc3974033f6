"""Exception hierarchy shared by the library and the CLI.

Each error carries the process exit code the CLI reports for it.
"""


class HerdingError(Exception):
    """Base class for all herdfield errors."""

    exit_code: int = 1


class ConfigError(HerdingError, ValueError):
    """Invalid run configuration (exit code 2)."""

    exit_code = 2


class DataError(HerdingError, ValueError):
    """Bad input data: missing file, dimension mismatch, cap exceeded (exit code 3)."""

    exit_code = 3


class InvariantViolation(HerdingError, RuntimeError):
    """An internal invariant check failed (exit code 4)."""

    exit_code = 4
