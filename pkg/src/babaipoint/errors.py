"""Exception hierarchy.

Precondition-style failures (a required hypothesis or an input domain not
met) derive from :class:`PreconditionError`; the CLI maps them to exit code 2.
Input parsing failures derive from :class:`ParseError` (exit code 3).
"""


class LatticeError(Exception):
    """Base class for all package errors."""


class PreconditionError(LatticeError):
    pass


class SingularMatrix(PreconditionError):
    pass


class NoRationalWithinTolerance(PreconditionError):
    pass


class Unbounded(LatticeError):
    pass


class DegenerateInput(LatticeError):
    pass


class UnsupportedDimension(PreconditionError):
    pass


class DimensionTooLarge(PreconditionError):
    pass


class NoObtuseSuperbaseFound(LatticeError):
    pass


class UnknownLattice(PreconditionError):
    pass


class ZeroDiagonal(PreconditionError):
    pass


class BudgetExceeded(LatticeError):
    pass


class MissingMessage(LatticeError):
    pass


class UnsupportedForExact(PreconditionError):
    pass


class PreconditionViolation(PreconditionError):
    pass


class DensityOutOfRange(PreconditionError):
    pass


class ConditionFailed(PreconditionError):
    """A bound's applicability condition does not hold."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class HypothesisFailed(PreconditionError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class ParseError(LatticeError):
    def __init__(self, message, row=None, col=None):
        where = ""
        if row is not None:
            where = f" (vector {row}" + (f", entry {col})" if col is not None else ")")
        super().__init__(message + where)
        self.row = row
        self.col = col


class DimensionMismatch(ParseError):
    pass
