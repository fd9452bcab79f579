"""Exception hierarchy shared by the geometry, solver and CLI layers."""


class StiefelError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(StiefelError, ValueError):
    """Shapes, symmetry or orthonormality preconditions are violated."""


class RankError(StiefelError, ValueError):
    """A matrix that must have full column rank does not."""


class BranchError(StiefelError, ValueError):
    """The principal matrix logarithm is ambiguous (eigenvalue at -1)."""


class UnsupportedMetricError(StiefelError, ValueError):
    """Geodesic operations are only available for beta in {0.5, 1.0}."""


class DomainError(StiefelError, ValueError):
    """Distance bounds are only certified for n >= 2p."""


class DegenerateCertificateError(StiefelError, ArithmeticError):
    """A certificate has a zero denominator."""


class LogDivergenceError(StiefelError, ArithmeticError):
    """The Riemannian logarithm iteration did not converge.

    Attributes
    ----------
    residual : float
        Last residual of the iteration.
    index : int or None
        Index of the offending data point, filled in by the objective layer.
    """

    def __init__(self, message, residual=float("nan"), index=None):
        super().__init__(message)
        self.residual = residual
        self.index = index
