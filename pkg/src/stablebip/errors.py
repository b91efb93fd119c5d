"""Exception types raised across the package."""


class StableBIPError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(StableBIPError, ValueError):
    """A parameter lies outside its admissible domain."""


class UnsupportedCaseError(StableBIPError):
    pass


class DivergingMomentError(StableBIPError):
    """Requested moment E|X|^p is infinite for the given law."""


class MomentOrderError(StableBIPError, ValueError):
    pass


class HypothesisError(StableBIPError):
    """A prior specification fails the series-convergence hypotheses."""


class ShapeError(StableBIPError, ValueError):
    pass


class FactorizationError(StableBIPError):
    pass


class InputError(StableBIPError, ValueError):
    pass


class DegenerateWeightsError(StableBIPError):
    pass


class ReferenceMismatchError(StableBIPError):
    """Two posteriors were not built on the same prior draws."""


class RadiusError(StableBIPError, ValueError):
    pass


class FamilyError(StableBIPError):
    pass


class GeometryError(StableBIPError, ValueError):
    pass


class IterationLimitError(StableBIPError):
    """Optimiser hit its iteration cap. ``best`` holds the best iterate found."""

    def __init__(self, message, best=None, objective=None):
        super().__init__(message)
        self.best = best
        self.objective = objective
