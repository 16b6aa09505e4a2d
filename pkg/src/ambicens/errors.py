"""Exception types raised by the estimation routines."""


class DatasetError(ValueError):
    """Input data violates the batch invariants."""


class DegenerateIntervalError(ValueError):
    """Sampling requested from an interval of zero probability."""


class EstimationError(RuntimeError):
    """Base class for fitting failures."""


class NoRootError(EstimationError):
    """A score equation has no root in the admissible range."""


class NoEventsError(EstimationError):
    """A censored sample contains no observed failures."""


class MLENotFoundError(EstimationError):
    """The likelihood has no interior maximum in the search bracket."""


class NonConvergenceError(EstimationError):
    """Too many iterations of the imputation chain failed to fit."""
