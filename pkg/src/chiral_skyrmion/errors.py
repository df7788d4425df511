"""Exception hierarchy.

Each class maps to one failure category so callers (and the CLI exit-code
logic) can react without parsing messages.
"""

from __future__ import annotations


class SkyrmionError(Exception):
    """Base class for all package errors."""


class ParameterError(SkyrmionError, ValueError):
    """Invalid argument, shape mismatch or out-of-range parameter."""


class DomainError(ParameterError):
    """Special-function or operator argument outside its domain."""


class OutOfRangeError(ParameterError):
    """Coupling outside the range where an asymptotic relation applies."""


class ResolutionError(SkyrmionError):
    """The grid cannot resolve the requested frequency range."""


class RootBracketError(SkyrmionError):
    """A bracketed root search found no sign change."""


class LinearSolveError(SkyrmionError):
    """A direct linear solve hit a singular pivot."""


class ConvergenceError(SkyrmionError):
    """An iterative solver did not converge.

    ``partial`` carries whatever results were produced before the failure.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class StagnationError(ConvergenceError):
    """Descent step size collapsed below the floor."""
