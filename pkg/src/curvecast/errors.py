"""Exception types raised by curvecast."""


class CurvecastError(Exception):
    """Base class for all curvecast errors."""


class DomainError(CurvecastError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientDataError(CurvecastError, ValueError):
    """Too few observations to fit or evaluate."""


class AlignmentError(CurvecastError, ValueError):
    """Streams that must share a word-position grid do not."""


class OutOfRangeError(CurvecastError, IndexError):
    """A word position lies beyond the end of the corpus."""


class FormatError(CurvecastError, ValueError):
    """An input file could not be parsed."""
