"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an argument violates a documented precondition."""


class NumericError(ArithmeticError):
    """Raised when a numerical procedure fails to reach its tolerance.

    ``last`` carries whatever partial result the procedure had when it gave up
    (an iterate, a polygon, a bracket), so callers can inspect it.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last
