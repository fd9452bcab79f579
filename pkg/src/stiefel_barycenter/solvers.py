"""Barycenter solvers.

* ``A1``: Riemannian gradient descent on ``f_nu^nu`` (exact distances).
* ``A2_lower`` / ``A2_upper``: the same descent on the chordal lower or
  upper surrogate raised to ``nu``.
* ``A3``: fixed-point iteration on orthographic lifts, retracted with QR.

All three start from the same initializer and stop once the change of
their own objective drops below ``epsilon`` times its initial value.
"""

import enum
import logging
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional, Union

import numpy as np

from ._parallel import pairwise_sum
from .errors import InvalidArgumentError, LogDivergenceError, RankError
from .objectives import (
    SINGULAR_TOL,
    check_nu,
    distances,
    logs_to_points,
    lower_distances,
    objective_exact,
    objective_lower,
    objective_upper,
    power_sum,
    riemannian_gradient_exact,
    riemannian_gradient_lower,
    riemannian_gradient_upper,
    upper_distances,
)

log = logging.getLogger(__name__)

DIVERGENCE_WINDOW = 20
# descent directions shorter than this are rounding noise: stationary
STEP_TOL = 1e-14


class Algorithm(str, enum.Enum):
    A1 = "A1"
    A2_LOWER = "A2_lower"
    A2_UPPER = "A2_upper"
    A3 = "A3"


@dataclass(frozen=True)
class SolverConfig:
    """Solver selection and stopping parameters.

    ``init`` is ``"polar_mean"``, an integer index into the dataset, or an
    explicit ``(n, p)`` starting point. ``step_init=None`` means ``1 / N``.
    """

    algo: Algorithm = Algorithm.A2_LOWER
    nu: float = 2.0
    epsilon: float = 1e-6
    max_iter: int = 1000
    step_init: Optional[float] = None
    armijo_c: float = 1e-4
    max_halvings: int = 30
    a3_normalized: bool = True
    init: Union[str, int, np.ndarray] = "polar_mean"
    exact_trace: bool = False
    compute_exact: bool = True

    def __post_init__(self):
        object.__setattr__(self, "algo", Algorithm(self.algo))
        object.__setattr__(self, "nu", check_nu(self.nu))
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive")
        if self.max_iter < 1:
            raise InvalidArgumentError("max_iter must be >= 1")
        if self.step_init is not None and not self.step_init > 0:
            raise InvalidArgumentError("step_init must be positive")


@dataclass
class TraceRecord:
    iter: int
    f_nu: Optional[float]
    objective_internal: float
    update_norm: float
    time_ms: float


@dataclass
class BarycenterResult:
    point: np.ndarray
    config: SolverConfig
    trace: List[TraceRecord]
    converged: bool
    status: str
    iterations: int
    wall_time_ms: float
    f_nu: Optional[float] = None
    f_hat: Optional[float] = None
    F_hat: Optional[float] = None
    init_fallback: bool = False
    notes: List[str] = field(default_factory=list)


def euclidean_mean_projection(ds):
    """Polar projection of the ambient mean of the data points.

    Returns
    -------
    X : ndarray, shape (n, p)
    fell_back : bool
        True when the mean is rank deficient and data point 0 is returned.
    """
    mean = ds.points.mean(axis=0)
    try:
        return ds.manifold.project(mean), False
    except RankError:
        log.warning("ambient mean is rank deficient; falling back to data point 0")
        return ds.points[0].copy(), True


def initial_point(ds, init):
    if isinstance(init, str):
        if init != "polar_mean":
            raise InvalidArgumentError(f"unknown initializer {init!r}")
        return euclidean_mean_projection(ds)
    if isinstance(init, (int, np.integer)):
        if not 0 <= init < ds.N:
            raise InvalidArgumentError(f"init index {init} out of range")
        return ds.points[init].copy(), False
    return ds.manifold.check_point(init).copy(), False


def _finalize(ds, cfg, X, trace, status, iterations, t0, fell_back, exact_value=None):
    res = BarycenterResult(
        point=X,
        config=cfg,
        trace=trace,
        converged=status == "converged",
        status=status,
        iterations=iterations,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        init_fallback=fell_back,
    )
    nu = cfg.nu
    if ds.n >= 2 * ds.p:
        res.f_hat = objective_lower(ds, nu, X)
        res.F_hat = objective_upper(ds, nu, X)
    if exact_value is not None:
        res.f_nu = exact_value
    elif cfg.compute_exact:
        try:
            res.f_nu = objective_exact(ds, nu, X)
        except LogDivergenceError as exc:
            res.notes.append(f"exact objective unavailable: logarithm to data point {exc.index} "
                             "did not converge")
    return res


# ----------------------------------------------------------------------
# Riemannian gradient descent (A1, A2)


class _ExactObjective:
    """``f_nu^nu`` with logarithms warm-started from the previous point."""

    def __init__(self, ds, nu):
        self.ds, self.nu = ds, nu

    def value(self, X, inits=None):
        logs = logs_to_points(self.ds, X, inits)
        return power_sum(distances(self.ds, X, logs), self.nu), logs

    def grad(self, X, cache):
        return riemannian_gradient_exact(self.ds, self.nu, X, cache)

    def warm(self, X_new, cache, step):
        M = self.ds.manifold
        return [M.proj(X_new, L + step) for L in cache]


class _SurrogateObjective:
    def __init__(self, ds, nu, upper):
        self.ds, self.nu, self.upper = ds, nu, upper

    def value(self, X, inits=None):
        d = upper_distances(self.ds, X) if self.upper else lower_distances(self.ds, X)
        return power_sum(d, self.nu), None

    def grad(self, X, cache):
        if self.upper:
            return riemannian_gradient_upper(self.ds, self.nu, X)
        return riemannian_gradient_lower(self.ds, self.nu, X)

    def warm(self, X_new, cache, step):
        return None


def solve_rgd(ds, config):
    """Riemannian gradient descent with Armijo backtracking.

    Iterates ``X <- R_X(-t grad)`` with the QR retraction, halving ``t`` from
    ``step_init`` until sufficient decrease. Stops when consecutive values of
    the minimized objective ``phi`` differ by at most ``epsilon * phi(X0)``.

    Returns
    -------
    BarycenterResult
        ``status`` is ``converged``, ``max_iter`` or ``stalled`` (line search
        failed after ``max_halvings`` halvings).
    """
    cfg = config
    if cfg.algo is Algorithm.A3:
        raise InvalidArgumentError("solve_rgd handles A1, A2_lower and A2_upper")
    t0 = time.perf_counter()
    M = ds.manifold
    nu = cfg.nu
    if cfg.algo is Algorithm.A1:
        obj = _ExactObjective(ds, nu)
    else:
        M._require_bounds_domain()
        obj = _SurrogateObjective(ds, nu, upper=cfg.algo is Algorithm.A2_UPPER)
    step_init = cfg.step_init if cfg.step_init is not None else 1.0 / ds.N

    X, fell_back = initial_point(ds, cfg.init)
    phi, cache = obj.value(X)
    phi0 = phi
    trace = []

    def record(k, phi, update_norm, cache):
        f = None
        if cfg.algo is Algorithm.A1:
            f = phi ** (1.0 / nu)
        elif cfg.exact_trace:
            f = objective_exact(ds, nu, X)
        trace.append(TraceRecord(k, f, phi, update_norm, (time.perf_counter() - t0) * 1e3))

    record(0, phi, 0.0, cache)
    status, k = "max_iter", 0
    if phi0 == 0.0:
        status = "converged"
    while status == "max_iter" and k < cfg.max_iter:
        G = obj.grad(X, cache)
        g2 = M.inner(X, G, G)
        if np.sqrt(g2) <= STEP_TOL:
            status = "converged"
            break
        t = step_init
        for _ in range(cfg.max_halvings + 1):
            X_new = M.retr(X, -t * G)
            phi_new, cache_new = obj.value(X_new, obj.warm(X_new, cache, t * G))
            if phi_new <= phi - cfg.armijo_c * t * g2:
                break
            t *= 0.5
        else:
            status = "stalled"
            break
        k += 1
        X, cache, phi_old, phi = X_new, cache_new, phi, phi_new
        record(k, phi, t * np.sqrt(g2), cache)
        if abs(phi - phi_old) <= cfg.epsilon * phi0:
            status = "converged"
    exact = phi ** (1.0 / nu) if cfg.algo is Algorithm.A1 else None
    return _finalize(ds, cfg, X, trace, status, k, t0, fell_back, exact)


# ----------------------------------------------------------------------
# lifting-map fixed point (A3)


def lift_objective(ds, nu, Z):
    """``g_nu(Z)^nu = sum_i |Proj_{T_Z}(x_i - Z)|_beta^nu``."""
    M = ds.manifold
    return power_sum([M.norm(Z, M.lift(Z, Xi)) for Xi in ds.points], nu)


def fixed_point_direction(ds, nu, Z, normalized=True):
    """Weighted lift sum ``sum_i w_i L_i`` with ``w_i = nu |L_i|^(nu-2)``.

    Divided by ``sum_i w_i`` when ``normalized``. Lifts shorter than
    ``1e-12`` are skipped for ``nu < 2``.
    """
    M = ds.manifold
    terms, weights = [], []
    for Xi in ds.points:
        L = M.lift(Z, Xi)
        r = M.norm(Z, L)
        if nu < 2.0 and r < SINGULAR_TOL:
            continue
        w = nu * r ** (nu - 2.0) if r > 0 else (nu if nu == 2.0 else 0.0)
        terms.append(w * L)
        weights.append(w)
    if not terms:
        return M.zero_vector(Z)
    v = pairwise_sum(terms)
    wsum = pairwise_sum(weights)
    if normalized and wsum > 0:
        v = v / wsum
    return v


def solve_fixed_point(ds, config):
    """Fixed-point iteration ``Z <- R_Z(sum_i w_i L_Z(x_i))`` (algorithm A3).

    Returns
    -------
    BarycenterResult
        ``status`` is ``converged``, ``max_iter`` or ``diverged`` (the lift
        objective grew for 20 consecutive iterations).
    """
    cfg = config
    if cfg.algo is not Algorithm.A3:
        raise InvalidArgumentError("solve_fixed_point handles A3 only")
    t0 = time.perf_counter()
    M = ds.manifold
    nu = cfg.nu
    Z, fell_back = initial_point(ds, cfg.init)
    g = lift_objective(ds, nu, Z)
    g0 = g
    trace = [TraceRecord(0, objective_exact(ds, nu, Z) if cfg.exact_trace else None, g, 0.0,
                         (time.perf_counter() - t0) * 1e3)]
    status, k, growth = "max_iter", 0, 0
    if g0 == 0.0:
        status = "converged"
    while status == "max_iter" and k < cfg.max_iter:
        v = fixed_point_direction(ds, nu, Z, cfg.a3_normalized)
        vnorm = M.norm(Z, v)
        if vnorm <= STEP_TOL:
            status = "converged"
            break
        Z = M.retr(Z, v)
        k += 1
        g_old, g = g, lift_objective(ds, nu, Z)
        trace.append(TraceRecord(k, objective_exact(ds, nu, Z) if cfg.exact_trace else None, g,
                                 vnorm, (time.perf_counter() - t0) * 1e3))
        growth = growth + 1 if g > g_old else 0
        if abs(g - g_old) <= cfg.epsilon * g0:
            status = "converged"
        elif growth >= DIVERGENCE_WINDOW or not np.isfinite(g):
            status = "diverged"
    return _finalize(ds, cfg, Z, trace, status, k, t0, fell_back)


def solve(ds, config):
    """Dispatch to :func:`solve_rgd` or :func:`solve_fixed_point`."""
    if config.algo is Algorithm.A3:
        return solve_fixed_point(ds, config)
    return solve_rgd(ds, config)


def with_algo(config, algo, **changes):
    """Copy of ``config`` running a different algorithm."""
    return replace(config, algo=Algorithm(algo), **changes)
