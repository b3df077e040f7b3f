"""
Exception hierarchy for flmtest.
Library code raises these; only the CLI and the simulation harness catch them.
"""
from typing import Optional


class FlmTestError(Exception):
    """Base class for all flmtest errors."""


class ValidationError(FlmTestError, ValueError):
    """Invalid inputs, options or configuration."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DomainError(FlmTestError, ValueError):
    """Grid points or domains that do not fit together."""


class RankError(FlmTestError, ValueError):
    """Numerical rank differs from what the construction requires."""


class ConvergenceError(FlmTestError, ArithmeticError):
    """Non-finite values during estimation or optimization."""


class DataFormatError(FlmTestError, ValueError):
    """Malformed or inconsistent input files."""
