"""Exception hierarchy.

Every error raised on bad input derives from :class:`ValidationError`, every
numerical breakdown from :class:`NumericalError`.  The CLI maps the first to
exit code 1 and the second to exit code 2.
"""


class SdrError(Exception):
    """Base class for all package errors."""


class ValidationError(SdrError, ValueError):
    """Input rejected before any computation."""


class NumericalError(SdrError, ArithmeticError):
    """A numerical routine could not produce a valid result."""


class NotPositiveDefinite(NumericalError):
    """Cholesky pivot was not strictly positive; regularize and retry."""


class StillSingular(NumericalError):
    """Matrix failed the SPD check even after Tikhonov regularization."""


class NoConvergence(NumericalError):
    """Iterative eigen-solver hit its sweep cap."""


class RankDeficient(NumericalError):
    """Basis matrix does not have full column rank."""


class ParseError(ValidationError):
    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class MissingValue(ParseError):
    pass


class SingleClassResponse(ValidationError):
    pass


class TooFewObservations(ValidationError):
    pass


class DegenerateResponse(ValidationError):
    pass


class GroupTooSmall(ValidationError):
    pass


class NotBinary(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class SingleClass(ValidationError):
    pass


class EmptyTestSet(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class InvalidSigma(ValidationError):
    pass


class InvalidTag(ValidationError):
    pass
