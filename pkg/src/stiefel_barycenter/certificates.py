"""A-posteriori certificates for an approximate barycenter.

Given a candidate ``x_hat`` the quantities below need only the chordal
bounds, except the lower distance bound which needs a reference optimal
value ``f_star`` (typically from an exact-objective run).
"""

from dataclasses import asdict, dataclass, field
from typing import List, Optional

from .errors import DegenerateCertificateError
from .objectives import check_nu, objective_exact, objective_lower, objective_upper

BRACKET_TOL = 1e-7


def thm1_certificate(ds, nu, x_hat):
    """Relative gap ``(F_hat - f_hat) / f_hat`` at ``x_hat``.

    Bounds ``(f(x_hat) - f(x*)) / f(x*)`` when ``x_hat`` globally minimizes
    the lower surrogate; solvers only certify local minimality.
    """
    f_lo = objective_lower(ds, nu, x_hat)
    if f_lo <= 0.0:
        raise DegenerateCertificateError("lower objective vanishes: every data point equals x_hat")
    return (objective_upper(ds, nu, x_hat) - f_lo) / f_lo


def thm2_upper(ds, nu, x_hat, exact=False):
    """``N^(-1/nu) * 2 * F_hat(x_hat)``, an upper bound on ``d(x*, x_hat)``.

    With ``exact=True`` the tighter ``N^(-1/nu) * 2 * f(x_hat)`` is returned.
    """
    nu = check_nu(nu)
    f = objective_exact(ds, nu, x_hat) if exact else objective_upper(ds, nu, x_hat)
    return ds.N ** (-1.0 / nu) * 2.0 * f


def thm3_lower(ds, nu, x_hat, f_star, f_hat_exact=None):
    """``(f(x_hat) - f_star) / N``, a lower bound on ``d(x*, x_hat)``.

    May be negative when ``x_hat`` beats the reference value.
    """
    nu = check_nu(nu)
    if f_hat_exact is None:
        f_hat_exact = objective_exact(ds, nu, x_hat)
    return (f_hat_exact - f_star) / ds.N


@dataclass
class BoundsReport:
    """Certificates at a candidate, optionally against a reference solution."""

    nu: float
    N: int
    f_lower: float
    f_upper: float
    thm1_rhs: float
    thm2_upper: float
    f_nu: Optional[float] = None
    f_star: Optional[float] = None
    thm1_lhs: Optional[float] = None
    thm3_lower: Optional[float] = None
    dist_ref: Optional[float] = None
    local_solution_caveat: bool = True
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def to_dict(self):
        return asdict(self)


def bounds_report(ds, nu, x_hat, reference=None, f_nu=None, tol=BRACKET_TOL):
    """Evaluate all certificates at ``x_hat``.

    Parameters
    ----------
    ds : Dataset
    nu : float
    x_hat : ndarray, shape (n, p)
        Candidate barycenter.
    reference : ndarray, shape (n, p), optional
        Reference barycenter ``x*``; enables the observed gap, the distance
        ``d(x*, x_hat)`` and the lower distance bound.
    f_nu : float, optional
        Precomputed ``f_nu(x_hat)``.
    tol : float
        Slack allowed when checking the bracket ordering.

    Returns
    -------
    BoundsReport
        ``violations`` lists every inequality found broken.
    """
    nu = check_nu(nu)
    f_lo = objective_lower(ds, nu, x_hat)
    f_up = objective_upper(ds, nu, x_hat)
    if f_lo <= 0.0:
        raise DegenerateCertificateError("lower objective vanishes: every data point equals x_hat")
    rep = BoundsReport(
        nu=nu,
        N=ds.N,
        f_lower=f_lo,
        f_upper=f_up,
        thm1_rhs=(f_up - f_lo) / f_lo,
        thm2_upper=ds.N ** (-1.0 / nu) * 2.0 * f_up,
    )
    if reference is None:
        return rep
    rep.f_nu = objective_exact(ds, nu, x_hat) if f_nu is None else f_nu
    rep.f_star = objective_exact(ds, nu, reference)
    rep.thm1_lhs = (rep.f_nu - rep.f_star) / rep.f_star if rep.f_star > 0 else 0.0
    rep.thm3_lower = (rep.f_nu - rep.f_star) / ds.N
    rep.dist_ref = ds.manifold.dist(reference, x_hat)
    if rep.thm1_lhs > rep.thm1_rhs + tol:
        rep.violations.append("observed relative gap exceeds the relative-gap certificate")
    if rep.dist_ref > rep.thm2_upper + tol:
        rep.violations.append("distance to the reference exceeds the upper distance bound")
    if rep.thm3_lower > rep.dist_ref + tol:
        rep.violations.append("lower distance bound exceeds the distance to the reference")
    return rep
