"""Exception types raised by the squeezing toolkit."""


class ParameterError(ValueError):
    """A physical parameter is missing, negative or otherwise unusable."""


class NonStationaryError(RuntimeError):
    """The drift matrix has an eigenvalue with non-positive real part."""


class UndefinedSpinError(ValueError):
    """The mean spin vanishes, so the squeezing criterion is undefined."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
