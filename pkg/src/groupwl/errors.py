"""Exception types shared across the package."""

from __future__ import annotations


class GroupWLError(Exception):
    """Base class for all package errors."""


class DimensionError(GroupWLError, ValueError):
    """Matrix shapes are incompatible with the requested operation."""


class ValidationError(GroupWLError, ValueError):
    """Input data does not describe a valid structure."""


class ParameterError(GroupWLError, ValueError):
    """An algorithm parameter is out of its admissible range."""


class BudgetExceeded(GroupWLError):
    """A search or enumeration would exceed its configured resource budget.

    Distinct from a negative answer: the question was left undecided.
    """

    def __init__(self, what: str, needed: float | None = None, budget: float | None = None):
        self.what = what
        self.needed = needed
        self.budget = budget
        msg = what
        if needed is not None and budget is not None:
            msg = f"{what}: needs {needed:.3g}, budget {budget:.3g}"
        super().__init__(msg)


class InvariantViolation(GroupWLError, AssertionError):
    """An internal consistency check failed."""
