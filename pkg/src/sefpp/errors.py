"""Exception hierarchy shared by every module."""


class SefppError(Exception):
    """Base class for all package errors."""


class RejectedInputError(SefppError, ValueError):
    """An argument has the wrong shape, dimension or domain."""


class RejectedParametersError(RejectedInputError):
    """Normalization parameters (eta, zeta) outside their admissible range."""


class RejectedConfigError(RejectedInputError):
    """A solver configuration breaks a step-size or schedule rule."""


class DomainError(SefppError, ArithmeticError):
    """A mapping produced a non-finite value.

    ``coordinate`` is the index of the first offending output entry and
    ``point`` the input that triggered it.
    """

    def __init__(self, message, coordinate=None, point=None):
        super().__init__(message)
        self.coordinate = coordinate
        self.point = point


class NumericalFailureError(SefppError, ArithmeticError):
    """An iterative routine diverged or hit its iteration cap.

    ``estimate`` carries the best available value (last iterate, last norm
    estimate) and ``residual`` the last measured residual, when meaningful.
    """

    def __init__(self, message, estimate=None, residual=None, quantity=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual
        self.quantity = quantity
