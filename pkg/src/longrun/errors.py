"""Exception hierarchy.

Input problems derive from ``ValidationError`` (CLI exit code 1); numerical
failures such as non-convergence derive from ``NumericalError`` (exit code 2).
"""

from __future__ import annotations


class LongRunError(Exception):
    """Base class for all package errors."""


class ValidationError(LongRunError, ValueError):
    """Malformed or inconsistent input."""


class DomainError(ValidationError):
    """A value lies outside the domain an operation is defined on."""


class PreconditionError(ValidationError):
    """An operation was called without the inputs it requires."""


class NumericalError(LongRunError, ArithmeticError):
    """A computation failed numerically."""


class ConvergenceError(NumericalError):
    """An iterative solver did not converge."""


class DegenerateFitError(NumericalError):
    """A rate fit is undefined (too few nonzero points)."""
