"""Exception hierarchy shared across the package.

Two broad families matter to callers: :class:`NumericalError` (a numerical
precondition failed mid-computation) and :class:`DataError` (the input data
itself is unusable). Argument-validation errors double as ``ValueError`` so
they behave normally in plain-Python call sites.
"""


class CholordError(Exception):
    """Base class for all package errors."""


class NumericalError(CholordError):
    """A numerical operation failed (loss of positive definiteness etc.)."""


class NotPositiveDefinite(NumericalError):
    """A Cholesky pivot fell below tolerance."""


class DowndateBreaksPD(NumericalError):
    """A rank-one downdate would leave the matrix indefinite."""


class SingularFactor(NumericalError):
    """A triangular factor has a (near-)zero diagonal entry."""


class Diverged(NumericalError):
    """An iterative solver produced non-finite values."""


class DataError(CholordError):
    """Input data violates a precondition."""


class TooFewSamples(DataError):
    """An estimator needs more rows than it was given."""


class TooFewRows(DataError):
    """A data file has too few rows."""


class NonNumericData(DataError):
    """A data file contains cells that do not parse as numbers."""


class WindowTooLarge(DataError):
    """A rolling window is longer than the series."""


class LengthMismatch(CholordError, ValueError):
    """Two vectors that must have equal length do not."""


class NotSorted(CholordError, ValueError):
    """A vector that must be sorted descending is not."""


class IndexOutOfRange(CholordError, ValueError):
    """An index lies outside the valid range."""


class InvalidRange(CholordError, ValueError):
    """A (lo, hi) range is empty or otherwise invalid."""


class DimensionMismatch(CholordError, ValueError):
    """Two objects that must share a dimension do not."""


class EmptyGrid(CholordError, ValueError):
    """A parameter grid is empty."""


class TooLarge(CholordError, ValueError):
    """A problem size exceeds an enforced enumeration limit."""


class NoEdges(CholordError, ValueError):
    """An operation requires a graph with at least one edge."""


class DegenerateColumnWarning(UserWarning):
    """A conditioning column is (numerically) constant."""
