"""Riemannian l^nu barycenters on the Stiefel manifold under the beta-metric."""

from .certificates import BoundsReport, bounds_report, thm1_certificate, thm2_upper, thm3_lower
from .errors import (
    BranchError,
    DegenerateCertificateError,
    DomainError,
    InvalidArgumentError,
    LogDivergenceError,
    RankError,
    StiefelError,
    UnsupportedMetricError,
)
from .objectives import (
    objective_exact,
    objective_lower,
    objective_upper,
    riemannian_gradient_exact,
    riemannian_gradient_lower,
    riemannian_gradient_upper,
    stationarity_residual,
)
from .sampling import Dataset, sample_clustered, sample_uniform
from .solvers import Algorithm, BarycenterResult, SolverConfig, solve
from .stiefel import Stiefel

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "BarycenterResult",
    "BoundsReport",
    "BranchError",
    "Dataset",
    "DegenerateCertificateError",
    "DomainError",
    "InvalidArgumentError",
    "LogDivergenceError",
    "RankError",
    "SolverConfig",
    "Stiefel",
    "StiefelError",
    "UnsupportedMetricError",
    "bounds_report",
    "objective_exact",
    "objective_lower",
    "objective_upper",
    "riemannian_gradient_exact",
    "riemannian_gradient_lower",
    "riemannian_gradient_upper",
    "sample_clustered",
    "sample_uniform",
    "solve",
    "stationarity_residual",
    "thm1_certificate",
    "thm2_upper",
    "thm3_lower",
]
