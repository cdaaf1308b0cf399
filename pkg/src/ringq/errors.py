"""Exception types shared across the toolkit."""


class RingQError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgument(RingQError, ValueError):
    """An argument is outside the documented domain of an operation."""


class OutOfDomain(InvalidArgument):
    """A point lies outside the domain of a map or profile."""


class EvaluationError(RingQError, ArithmeticError):
    """A user-supplied field failed to evaluate or returned NaN."""


class DegenerateProfile(RingQError, ValueError):
    """A dilatation profile vanishes where the construction divides by it."""


class ConvergenceError(RingQError, RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    The last iterate is kept on ``result`` so callers can inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
