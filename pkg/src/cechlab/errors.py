"""Exception hierarchy shared by every module.

The CLI maps :class:`InvariantError` to exit code 1 and every other
:class:`CechLabError` to exit code 2.
"""


class CechLabError(Exception):
    """Base class for all library errors."""


class InvalidInputError(CechLabError, ValueError):
    """Malformed arguments: wrong dimensions, non-positive intensities, ..."""


class OutOfRegimeError(CechLabError, ValueError):
    """A radius or configuration lies outside the convexity regime."""


class DegenerateGeodesicError(CechLabError, ValueError):
    """The minimizing geodesic between two points is not unique."""


class InvalidComplexError(CechLabError, ValueError):
    """A simplicial complex is not closed under taking faces."""


class InsufficientDimensionError(CechLabError, ValueError):
    """Homology was requested in a degree the complex cannot certify."""


class InvalidConfigurationError(CechLabError, ValueError):
    """A point configuration is not critical where one was required."""


class InvariantError(CechLabError, AssertionError):
    """A mathematical invariant failed on a concrete instance."""
