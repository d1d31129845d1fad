"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LocalSGDError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(LocalSGDError, ValueError):
    """Inconsistent or malformed experiment inputs (dimensions, fields, schedules)."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(LocalSGDError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedOperationError(LocalSGDError, TypeError):
    """The operation is not defined for this kind of objective."""


class NoMinimizerError(LocalSGDError, ValueError):
    """The objective has no (unique) minimizer."""


class PreconditionError(LocalSGDError, ValueError):
    """A precondition of a checked bound (e.g. a step-size cap) is violated."""
