"""Exception types shared across the solver."""


class SingularMatrixError(Exception):
    """A linear solve hit a zero or near-zero pivot."""


class NumericalFailureError(Exception):
    """A numerical routine failed to converge or verify."""


class BlowUpError(Exception):
    """Non-finite values appeared in the solution.

    Carries the first time at which a NaN/Inf was observed; runs treat this
    time as the blow-up time.
    """

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"solution blew up at t={self.time:.9g}")
