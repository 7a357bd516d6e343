"""Exception types shared across the package."""
from __future__ import annotations


class PrangeError(Exception):
    """Base class for all package errors."""


class ParseError(PrangeError):
    """Raised when an expression or system file cannot be parsed."""


class DomainError(PrangeError):
    """Evaluation left the domain of sqrt or arccos."""


class DivisionByZero(PrangeError):
    """Evaluation divided by zero."""


class ModelError(PrangeError):
    """Base class for constraint-system validation errors."""


class UnknownEntity(ModelError):
    """A constraint references an entity id that was never declared."""


class DuplicateId(ModelError):
    """Two entities or parameters share a name."""


class ArityMismatch(ModelError):
    """A constraint references the wrong number or kind of entities."""


class UnknownParameter(ModelError):
    """A parameter name is referenced but not declared."""


class SeparationError(PrangeError):
    """Target/fixed/unassigned partition is inconsistent."""


class ConfigError(PrangeError):
    """Solver configuration value out of its legal domain."""


class RecursionLimit(PrangeError):
    """Nested singularity analysis exceeded the supported depth."""


class SelectionError(PrangeError):
    """Invalid variable selection for an editing session."""


class OutOfRange(PrangeError):
    """Assigned value lies outside the computed valid range."""

    def __init__(self, parameter: str, value: float, intervals: object = None):
        self.parameter = parameter
        self.value = value
        self.intervals = intervals
        detail = f"value {value:g} for {parameter!r} is outside the valid range"
        if intervals:
            detail += " " + " u ".join(_interval_text(iv) for iv in intervals)
        super().__init__(detail)


def _interval_text(iv: dict) -> str:
    lo = "[" if iv.get("loClosed") else "("
    hi = iv.get("hi")
    if hi is None:
        return f"{lo}{iv.get('lo'):g}, +inf)"
    return f"{lo}{iv.get('lo'):g}, {hi:g}{']' if iv.get('hiClosed') else ')'}"


class StaleRanges(PrangeError):
    """Ranges were not recomputed after the last state change."""


class EmptyHistory(PrangeError):
    """Undo requested with no assignment to revert."""


class SolveFailure(PrangeError):
    """The full system could not be solved at the requested values."""

    def __init__(self, message: str, best_residual: float | None = None):
        self.best_residual = best_residual
        super().__init__(message)
