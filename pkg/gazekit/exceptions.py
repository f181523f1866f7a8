"""
The :mod:`gazekit.exceptions` module includes all custom warnings and error
classes used across gazekit.
"""

__all__ = ['GazeDataError',
           'EmptyInputError',
           'GazeParseError',
           'OrderingError',
           'ShapeError',
           'DegenerateError',
           'DegenerateTraceError',
           'DegenerateVarianceError',
           'DegenerateDistributionError',
           'DegenerateTargetError',
           'EmptyDensityError',
           'ContractError',
           'QuotaError',
           'DanglingReferenceError',
           'SelfViewingError',
           'SynthWarning']


class GazeDataError(ValueError):
    """Base class for errors caused by the content of the data rather than
    by the arguments of a call.

    The command line maps it to exit code 3.
    """


class EmptyInputError(GazeDataError):
    """Raised when a file, trace or collection that must hold at least one
    element is empty."""


class GazeParseError(GazeDataError):
    """Raised when a gaze CSV row cannot be parsed.

    Parameters
    ----------
    message : str
        Description of the problem.

    line : int
        1-based line number in the source text.
    """

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OrderingError(GazeDataError):
    """Raised when gaze timestamps are not strictly increasing."""


class ShapeError(GazeDataError):
    """Raised when grids or sequences do not have matching dimensions."""


class DegenerateError(GazeDataError):
    """Base class for inputs on which a quantity is mathematically
    undefined."""


class DegenerateTraceError(DegenerateError):
    """Raised when a trace spans zero time and cannot be duration
    normalized."""


class DegenerateVarianceError(DegenerateError):
    """Raised when a map has (numerically) zero variance and cannot be
    z-scored."""


class DegenerateDistributionError(DegenerateError):
    """Raised when a map sums to zero and cannot be turned into a
    distribution."""


class DegenerateTargetError(DegenerateDistributionError):
    """Raised when the ground-truth map of a divergence sums to zero."""


class EmptyDensityError(DegenerateError):
    """Raised when a normalized fixation density map is requested without
    any fixation."""


class ContractError(GazeDataError):
    """Raised when an input does not satisfy the contract of an operation,
    e.g. a grid that should be a probability distribution."""


class QuotaError(GazeDataError):
    """Raised when a viewing subset quota cannot be met.

    Parameters
    ----------
    message : str
        Description of the problem.

    shortfall : int
        Number of participants missing to meet the quota.
    """

    def __init__(self, message, shortfall):
        super().__init__(message)
        self.shortfall = shortfall


class DanglingReferenceError(GazeDataError):
    """Raised when a passive trial references an unknown source trial."""


class SelfViewingError(GazeDataError):
    """Raised when an observer is scheduled to watch their own
    demonstration."""


class SynthWarning(UserWarning):
    """Warning used when a SynthSpec produces fixations
    that the requested detection thresholds cannot recover."""
