"""Exception hierarchy.

``DomainError`` covers every violated geometric precondition; the CLI maps it
to exit code 3. ``ParseError`` (exit 2) is raised for malformed scene files.
"""


class CoconvexError(Exception):
    """Base class for all package errors."""


class ParseError(CoconvexError):
    pass


class DomainError(CoconvexError, ValueError):
    pass


class DegenerateInput(DomainError):
    pass


class NotPointed(DomainError):
    pass


class NotFullDimensional(DomainError):
    pass


class NotUnit(DomainError):
    pass


class DirectionOutsideOmega(DomainError):
    pass


class Unbounded(DomainError):
    pass


class Empty(DomainError):
    pass


class LowerDimensional(DomainError):
    pass


class NonpositiveOffset(DomainError):
    pass


class NonpositiveScale(DomainError):
    pass


class ConeMismatch(DomainError):
    pass


class WrongArity(DomainError):
    pass


class EmptySelection(DomainError):
    pass


class LambdaOutOfRange(DomainError):
    pass


class InvalidMeasure(DomainError):
    pass


class StepTooLarge(DomainError):
    pass


class NonConvergence(CoconvexError):
    """Raised by the solvers in strict mode; carries the failed report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
