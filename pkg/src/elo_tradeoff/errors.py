"""
Exception hierarchy for the energy-latency trade-off toolkit.

Every error raised by the package derives from EloError. Domain and config
errors also derive from ValueError so callers that only catch ValueError
keep working.
"""

from typing import Optional, Tuple


class EloError(Exception):
    """Base class for all package errors."""


class DomainError(EloError, ValueError):
    """An argument lies outside the domain of a formula or parameter."""


class DegenerateQ(DomainError):
    """Compression ratio Q = 1 where a formula divides by E[X_c] = 0."""


class Infeasible(EloError):
    """The constraint set of a problem is empty."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class ConvergenceError(EloError, ArithmeticError):
    """An iterative method hit its iteration limit."""

    def __init__(self, message: str, bracket: Tuple[float, float]):
        super().__init__(f"{message} (last bracket: [{bracket[0]!r}, {bracket[1]!r}])")
        self.bracket = bracket


class ConfigError(EloError, ValueError):
    """A configuration document could not be parsed or validated."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        key: Optional[str] = None,
    ):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
        self.key = key
