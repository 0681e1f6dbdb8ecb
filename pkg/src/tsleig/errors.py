"""Exception hierarchy shared by all tsleig modules."""


class TsleigError(Exception):
    """Base class for every error raised by the package."""


class NumericFailure(TsleigError):
    """A numerical procedure could not produce a trustworthy result."""


class AsymmetricCoefficients(TsleigError, ValueError):
    pass


class GridTooCoarse(TsleigError, ValueError):
    pass


class StripExceeded(TsleigError, ValueError):
    pass


class NearZeroSample(NumericFailure):
    pass


class UnresolvedPhase(NumericFailure):
    pass


class DegenerateNode(NumericFailure):
    pass


class NonzeroWinding(NumericFailure):
    pass


class NoContraction(NumericFailure):
    pass


class MaxIterExceeded(NumericFailure):
    pass


class DuplicateRoot(NumericFailure):
    pass


class NoConvergence(NumericFailure):
    pass


class AmbiguousPairing(UserWarning):
    """Two assignments of equal cost exist; the first one found is kept."""
