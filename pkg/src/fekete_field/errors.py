"""Exception types raised by the library."""


class FeketeFieldError(Exception):
    """Base class for all library errors."""


class NotOnBoundary(FeketeFieldError, ValueError):
    pass


class AmbiguousNormal(FeketeFieldError, ValueError):
    pass


class SingularPoint(FeketeFieldError, ValueError):
    pass


class CoincidentCharges(FeketeFieldError, ValueError):
    pass


class ChargeOutsideDomain(FeketeFieldError, ValueError):
    pass


class InfeasibleProblem(FeketeFieldError, ValueError):
    pass


class NotConverged(FeketeFieldError, RuntimeError):
    """Raised by strict minimization; ``result`` holds the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NonConvexDomain(FeketeFieldError, ValueError):
    pass


class BallsOverlap(FeketeFieldError, ValueError):
    pass


class SeriesNotConverged(FeketeFieldError, RuntimeError):
    """Image series hit ``n_max`` before the tail dropped below tolerance.

    ``system`` carries the truncated (still usable) solution.
    """

    def __init__(self, message, system=None):
        super().__init__(message)
        self.system = system


class SingularSystem(FeketeFieldError, ArithmeticError):
    pass


class InsideConductor(FeketeFieldError, ValueError):
    pass


class SingularEvaluation(FeketeFieldError, ValueError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SourceOnSurface(FeketeFieldError, ValueError):
    pass


class ResolutionOutOfRange(FeketeFieldError, ValueError):
    pass


class ZeroField(FeketeFieldError, ValueError):
    pass
