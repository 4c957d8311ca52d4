"""Exception hierarchy.

Configuration and domain problems derive from ``ValueError``; numerical
failures (series truncation, root bracketing) derive from ``ArithmeticError``
so the CLI can map them to distinct exit codes.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class GridMismatchError(ValueError):
    """Two grid functions do not share origin and step."""


class BinningMismatchError(ValueError):
    """Two histograms were built on different bins."""


class NumericalError(ArithmeticError):
    """Base class for numerical failures."""


class TruncationError(NumericalError):
    """The convolution series did not reach the requested tolerance.

    Attributes
    ----------
    remainder : float
        Remainder bound achieved at the last order tried.
    order : int
        Last order tried.
    """

    def __init__(self, message, remainder, order):
        super().__init__(message)
        self.remainder = remainder
        self.order = order


class TailDeficitError(NumericalError):
    """The grid stops before the invariant density has (numerically) vanished."""

    def __init__(self, message, deficit):
        super().__init__(message)
        self.deficit = deficit


class BracketError(NumericalError):
    """A root could not be bracketed."""
