"""Exception hierarchy shared by the geometry, measure and solver layers."""


class GminkError(Exception):
    """Base class for all errors raised by this package."""


class InputError(GminkError, ValueError):
    """Malformed or out-of-domain input (bad JSON, violated preconditions)."""


class GeometryError(GminkError):
    """A convex body could not be constructed (unbounded, empty, degenerate)."""


class NumericalError(GminkError):
    """A numerical procedure failed; ``best`` carries the best available result."""

    def __init__(self, message, best=None, **info):
        super().__init__(message)
        self.best = best
        self.info = info


class QuadratureError(NumericalError):
    def __init__(self, message, estimate, error_bound):
        super().__init__(message, best=estimate, error_bound=error_bound)
        self.estimate = estimate
        self.error_bound = error_bound


class BracketError(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class BranchLoss(NumericalError):
    """The continuation left the large-volume branch (gamma_n <= 1/2)."""


class FacetCollapse(NumericalError):
    """A prescribed facet degenerated to zero size."""


class MassTooLarge(NumericalError):
    """Total mass violates the sufficient condition |mu| < 1/sqrt(2 pi)."""


class NoAscent(NumericalError):
    pass


class StepCollapse(NumericalError):
    pass


class ConvexityLoss(NumericalError):
    pass
