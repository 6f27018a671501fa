"""Exception hierarchy shared by the pipeline stages."""


class HCBoundError(Exception):
    """Base class for every error raised by this package."""


class InvalidDimensionError(HCBoundError, ValueError):
    pass


class InvalidBlocksError(HCBoundError, ValueError):
    pass


class ShapeMismatchError(HCBoundError, ValueError):
    pass


class GradingError(HCBoundError):
    """ad(H) is not diagonal on the chosen basis, or eigenvalues are not integral."""


class TrivialModuleError(HCBoundError):
    """Raised when a cyclic module is requested for r = 0 (P = G)."""


class ClosureError(HCBoundError):
    """Internal consistency failure while building the cyclic module."""


class DomainError(HCBoundError, ValueError):
    """An argument lies outside the subspace the operation is defined on."""


class InjectivityError(HCBoundError):
    """A grade map X -> sigma(X) xi has numerically vanishing smallest singular value."""


class CertificateUnsoundError(HCBoundError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConditioningError(HCBoundError):
    pass
