"""Datasets of Stiefel points and the two seeded samplers."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .kernels import ORTHO_TOL, orthonormality_error
from .stiefel import GEODESIC_BETAS, Stiefel

DEFAULT_CLUSTER_RADIUS = 2.0
KINDS = ("spread", "clustered")


@dataclass(frozen=True)
class Dataset:
    """A collection of N points on St(n, p) sharing a metric parameter.

    ``points`` has shape ``(N, n, p)``; it is made read-only on construction.
    """

    n: int
    p: int
    beta: float
    points: np.ndarray
    kind: str = "spread"
    seed: int = 0
    cluster_radius: Optional[float] = None
    manifold: Stiefel = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[1:] != (self.n, self.p):
            raise InvalidArgumentError(
                f"points must have shape (N, {self.n}, {self.p}), got {pts.shape}"
            )
        if pts.shape[0] < 1:
            raise InvalidArgumentError("a dataset needs at least one point")
        for i, X in enumerate(pts):
            if orthonormality_error(X) > ORTHO_TOL:
                raise InvalidArgumentError(f"point {i} does not have orthonormal columns")
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"kind must be one of {KINDS}, got {self.kind!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "manifold", Stiefel(self.n, self.p, self.beta))

    @property
    def N(self):
        return self.points.shape[0]

    def __len__(self):
        return self.N

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            (self.n, self.p, self.beta, self.kind, self.seed, self.cluster_radius)
            == (other.n, other.p, other.beta, other.kind, other.seed, other.cluster_radius)
            and np.array_equal(self.points, other.points)
        )

    __hash__ = None


def _check_dims(n, p, N):
    if not (isinstance(n, (int, np.integer)) and isinstance(p, (int, np.integer))
            and isinstance(N, (int, np.integer))):
        raise InvalidArgumentError("n, p and N must be integers")
    if not 1 <= p <= n:
        raise InvalidArgumentError(f"need 1 <= p <= n, got n={n}, p={p}")
    if N < 1:
        raise InvalidArgumentError(f"need N >= 1, got {N}")


def sample_uniform(n, p, N, seed, beta=1.0):
    """N Haar-distributed points on St(n, p).

    Each point is the sign-fixed thin-QR factor of an ``n x p`` standard
    Gaussian matrix drawn from ``numpy.random.default_rng(seed)``.
    """
    _check_dims(n, p, N)
    rng = np.random.default_rng(seed)
    M = Stiefel(n, p, beta)
    points = np.stack([M.random_point(rng) for _ in range(N)])
    return Dataset(n, p, beta, points, kind="spread", seed=int(seed))


def sample_clustered(n, p, N, beta, radius=DEFAULT_CLUSTER_RADIUS, seed=0):
    """N points within geodesic distance ``radius / 2`` of a Haar-random center.

    Each point is ``Exp_C(xi)`` for an isotropic tangent direction whose
    beta-norm is uniform in ``[0, radius / 2]``, so pairwise distances stay
    below ``radius`` as long as the geodesics from ``C`` are minimizing.
    """
    _check_dims(n, p, N)
    if beta not in GEODESIC_BETAS:
        raise InvalidArgumentError(f"clustered sampling needs beta in {GEODESIC_BETAS}")
    if not radius > 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    rng = np.random.default_rng(seed)
    M = Stiefel(n, p, beta)
    C = M.random_point(rng)
    points = []
    for _ in range(N):
        xi = M.random_tangent(C, rng) * rng.uniform(0.0, radius / 2.0)
        points.append(M.exp(C, xi))
    return Dataset(n, p, beta, np.stack(points), kind="clustered", seed=int(seed),
                   cluster_radius=float(radius))
