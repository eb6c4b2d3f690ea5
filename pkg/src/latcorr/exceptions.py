"""Exception hierarchy.

Everything derives from :class:`LatcorrError`, which is a ``ValueError`` so
callers that only care about bad input can catch the builtin.
"""


class LatcorrError(ValueError):
    pass


class NonRectangularError(LatcorrError):
    pass


class NegativeCountError(LatcorrError):
    pass


class EmptyTableError(LatcorrError):
    pass


class DimensionMismatchError(LatcorrError):
    pass


class OutOfDomainError(LatcorrError):
    pass


class InvalidRectError(LatcorrError):
    pass


class RhoOutOfRangeError(LatcorrError):
    pass


class InvalidLambdaError(LatcorrError):
    pass


class ZeroCellError(LatcorrError):
    """A zero cell where the requested lambda needs strictly positive cells."""


class TOutOfRangeError(LatcorrError):
    pass


class NonFiniteInputError(LatcorrError):
    pass


class UnsupportedLambdaError(LatcorrError):
    pass


class BoundaryEstimateError(LatcorrError):
    """The point estimate sits on the boundary where the rho/z variances blow up."""


class DegenerateMarginsError(LatcorrError):
    pass


class NonConvergenceError(LatcorrError):
    pass


class ConfigError(LatcorrError):
    pass
