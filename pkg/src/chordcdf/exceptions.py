"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NorthPoleError(DomainError):
    """A sphere point (or ball) touches the north pole, where projection is singular."""


class DegenerateNominalError(DomainError):
    """The nominal point is (numerically) the origin.

    The pushforward density and the double-integral CDF both divide by
    ``|nominal|**2``; use :func:`chordcdf.cdf.cdf_ball` instead.
    """


class SingularInterconnectionError(ArithmeticError):
    """``1 - C P`` vanishes, so the feedback interconnection is ill-posed."""


class PoleOnAxisError(ArithmeticError):
    """A transfer function has a pole on the imaginary axis at the requested frequency."""


class ConvergenceError(RuntimeError):
    """A numerical procedure did not reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best available estimate when the procedure stopped.
    error : float
        Error bound (or estimate) associated with ``estimate``.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
