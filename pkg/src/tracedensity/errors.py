"""Exception types raised across the package."""


class TraceDensityError(Exception):
    """Base class for all errors raised by tracedensity."""


class InvalidCharacter(TraceDensityError, ValueError):
    pass


class OutOfRange(TraceDensityError, IndexError):
    pass


class EndpointMismatch(TraceDensityError, ValueError):
    pass


class KTooSmall(TraceDensityError, ValueError):
    pass


class GuardExceeded(TraceDensityError, ValueError):
    """An exhaustive enumeration would exceed its size guard."""


class InvalidP(TraceDensityError, ValueError):
    pass


class EmptyTraceSet(TraceDensityError, ValueError):
    pass


class ShapeMismatch(TraceDensityError, ValueError):
    pass


class EmptyDeck(TraceDensityError, ValueError):
    pass


class RepeatDetected(TraceDensityError, ValueError):
    """The deck implies a repeated (k-1)-mer, so greedy merging is ambiguous."""


class LengthMismatch(TraceDensityError, ValueError):
    pass


class SolveFailure(TraceDensityError, ArithmeticError):
    pass


class FormatError(TraceDensityError, ValueError):
    """A traces, density, deck or bounds file is malformed."""


class HighDeletionWarning(UserWarning):
    """Deletion probability is at or above 1/2; accuracy guarantees do not apply."""
