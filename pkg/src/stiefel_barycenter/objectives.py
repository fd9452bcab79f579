"""The l^nu barycenter objective, its chordal under/over-approximations and
their Riemannian gradients.

Every function takes a :class:`~stiefel_barycenter.sampling.Dataset`; the
metric is the dataset's ``beta``. Sums over data points go through
:func:`pairwise_sum` for bitwise reproducibility.
"""

import numpy as np

from ._parallel import pairwise_sum, pmap
from .errors import InvalidArgumentError, LogDivergenceError

SINGULAR_TOL = 1e-12
SLOPE_CAP = 1e6


def check_nu(nu):
    nu = float(nu)
    if not nu >= 1.0:
        raise InvalidArgumentError(f"nu must be >= 1, got {nu}")
    return nu


def _root(power_sum, nu):
    return float(power_sum) ** (1.0 / nu) if power_sum > 0 else 0.0


# ----------------------------------------------------------------------
# exact objective


def logs_to_points(ds, X, inits=None):
    """``[Log_X(x_i)]`` for every data point.

    Raises
    ------
    LogDivergenceError
        With ``index`` set to the first offending data point.
    """
    M = ds.manifold

    def one(i, Xi):
        try:
            return M.log(X, Xi, None if inits is None else inits[i])
        except LogDivergenceError as exc:
            exc.index = i
            raise

    return pmap(one, ds.points)


def distances(ds, X, logs=None):
    M = ds.manifold
    if logs is None:
        logs = logs_to_points(ds, X)
    return np.array([M.norm(X, L) for L in logs])


def power_sum(values, nu):
    return pairwise_sum(np.asarray(values, dtype=np.float64) ** nu)


def objective_exact(ds, nu, X, logs=None):
    """``(sum_i d(X, x_i)^nu)^(1/nu)``."""
    nu = check_nu(nu)
    return _root(power_sum(distances(ds, X, logs), nu), nu)


def riemannian_gradient_exact(ds, nu, X, logs=None):
    """Gradient of ``f_nu^nu``: ``-sum_i nu d_i^(nu-2) Log_X(x_i)``.

    For ``nu < 2`` terms with ``d_i < 1e-12`` are dropped (zero subgradient).
    """
    nu = check_nu(nu)
    M = ds.manifold
    if logs is None:
        logs = logs_to_points(ds, X)
    terms = []
    for L in logs:
        d = M.norm(X, L)
        if d < SINGULAR_TOL:
            continue
        terms.append(-nu * d ** (nu - 2.0) * L)
    if not terms:
        return M.zero_vector(X)
    return pairwise_sum(terms)


def stationarity_residual(ds, nu, X, logs=None):
    """beta-norm of ``sum_i d_i^(nu-2) Log_X(x_i)``; zero at a barycenter."""
    nu = check_nu(nu)
    G = riemannian_gradient_exact(ds, nu, X, logs)
    return ds.manifold.norm(X, G) / nu


# ----------------------------------------------------------------------
# chordal bounds


def chordal_distances(ds, X):
    diff = ds.points - X[None, :, :]
    return np.sqrt(np.einsum("kij,kij->k", diff, diff))


def lower_distances(ds, X):
    return ds.manifold.bound_lower_from_chordal(chordal_distances(ds, X))


def upper_distances(ds, X):
    return ds.manifold.bound_upper_from_chordal(chordal_distances(ds, X))


def objective_lower(ds, nu, X):
    """Under-approximation of ``f_nu`` built from the chordal lower bound."""
    nu = check_nu(nu)
    return _root(power_sum(lower_distances(ds, X), nu), nu)


def objective_upper(ds, nu, X):
    """Over-approximation of ``f_nu`` built from the chordal upper bound."""
    nu = check_nu(nu)
    return _root(power_sum(upper_distances(ds, X), nu), nu)


def _surrogate_rgrad(ds, nu, X, values, slopes, u):
    M = ds.manifold
    terms = []
    for Xi, val, slope, ui in zip(ds.points, values, slopes, u):
        if ui < SINGULAR_TOL:
            continue
        terms.append((nu * val ** (nu - 1.0) * slope / ui) * (X - Xi))
    if not terms:
        return M.zero_vector(X)
    return M.egrad_to_rgrad(X, pairwise_sum(terms))


def riemannian_gradient_lower(ds, nu, X):
    """Riemannian gradient of ``objective_lower^nu``."""
    nu = check_nu(nu)
    M = ds.manifold
    M._require_bounds_domain()
    u = chordal_distances(ds, X)
    ratio = np.minimum(u ** 2 / (4.0 * M.p), 1.0)
    with np.errstate(divide="ignore"):
        slopes = np.minimum(M.lower_factor / np.sqrt(1.0 - ratio), SLOPE_CAP)
    return _surrogate_rgrad(ds, nu, X, M.bound_lower_from_chordal(u), slopes, u)


def riemannian_gradient_upper(ds, nu, X):
    """Riemannian gradient of ``objective_upper^nu``.

    On the arcsine branch the slope factor is capped at ``1e6`` near the kink
    at chordal distance 2; beyond it the linear branch applies.
    """
    nu = check_nu(nu)
    M = ds.manifold
    M._require_bounds_domain()
    u = chordal_distances(ds, X)
    with np.errstate(divide="ignore"):
        arc_slope = 1.0 / np.sqrt(1.0 - np.minimum(u, 2.0) ** 2 / 4.0)
    slopes = M.upper_factor * np.where(u <= 2.0, np.minimum(arc_slope, SLOPE_CAP), 0.5 * np.pi)
    return _surrogate_rgrad(ds, nu, X, M.bound_upper_from_chordal(u), slopes, u)
