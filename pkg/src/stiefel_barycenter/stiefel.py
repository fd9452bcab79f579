"""The Stiefel manifold St(n, p) with the beta-metric family.

For a tangent vector ``xi = X @ Omega + K`` at ``X`` (``Omega`` skew,
``X^T K = 0``) the metric reads ``beta * |Omega|^2 + |K|^2``, so ``beta = 1``
is the Euclidean (embedded) metric and ``beta = 1/2`` the canonical one.
Points and tangent vectors are plain ``(n, p)`` float arrays; the base point
of a tangent vector is always passed explicitly.
"""

import numpy as np
import scipy.sparse.linalg as spla

from .errors import (
    BranchError,
    DomainError,
    InvalidArgumentError,
    LogDivergenceError,
    UnsupportedMetricError,
)
from .kernels import (
    ORTHO_TOL,
    SkewExponential,
    expm_skew,
    logm_orthogonal_principal,
    orthonormality_error,
    polar_orthogonal_factor,
    skew,
    sym,
    thin_qr_signfix,
)

GEODESIC_BETAS = (0.5, 1.0)
TANGENT_TOL = 1e-10
TOL_LOG = 1e-9
MAX_LOG_ITER = 1000
NEWTON_MAX_ITER = 30
NEWTON_MIN_STEP = 1e-3
GMRES_RESTART = 80
GMRES_MAXITER = 10
CONTINUATION_MIN_STEP = 1.0 / 256


class Stiefel:
    """St(n, p) endowed with the beta-metric.

    Parameters
    ----------
    n, p : int
        Ambient row count and number of orthonormal columns, ``1 <= p <= n``.
    beta : float, default=1.0
        Metric parameter; ``exp``/``log``/``dist`` need ``beta`` in {0.5, 1}.
    log_tol : float, default=1e-12
        Convergence threshold of the logarithm iterations.
    max_log_iter : int, default=1000
    """

    def __init__(self, n, p, beta=1.0, log_tol=1e-12, max_log_iter=MAX_LOG_ITER):
        if not (isinstance(n, (int, np.integer)) and isinstance(p, (int, np.integer))):
            raise InvalidArgumentError("n and p must be integers")
        if not 1 <= p <= n:
            raise InvalidArgumentError(f"need 1 <= p <= n, got n={n}, p={p}")
        if not beta > 0:
            raise InvalidArgumentError(f"beta must be positive, got {beta}")
        self.n = int(n)
        self.p = int(p)
        self.beta = float(beta)
        self.log_tol = log_tol
        self.max_log_iter = max_log_iter

    def __repr__(self):
        return f"Stiefel(n={self.n}, p={self.p}, beta={self.beta})"

    @property
    def dim(self):
        return self.n * self.p - self.p * (self.p + 1) // 2

    # ------------------------------------------------------------------
    # validation

    def _check_shape(self, *mats):
        for M in mats:
            if np.shape(M) != (self.n, self.p):
                raise InvalidArgumentError(
                    f"expected shape {(self.n, self.p)}, got {np.shape(M)}"
                )

    def check_point(self, X, tol=ORTHO_TOL):
        """Return ``X`` as float array after checking ``X^T X = I``."""
        X = np.asarray(X, dtype=np.float64)
        self._check_shape(X)
        if orthonormality_error(X) > tol:
            raise InvalidArgumentError("point does not have orthonormal columns")
        return X

    def check_tangent(self, X, Z, tol=TANGENT_TOL):
        Z = np.asarray(Z, dtype=np.float64)
        self._check_shape(X, Z)
        XtZ = X.T @ Z
        scale = max(1.0, float(np.max(np.abs(Z), initial=0.0)))
        if float(np.max(np.abs(XtZ + XtZ.T), initial=0.0)) > tol * scale:
            raise InvalidArgumentError("matrix is not tangent at the base point")
        return Z

    def _require_geodesic_beta(self):
        if self.beta not in GEODESIC_BETAS:
            raise UnsupportedMetricError(
                f"geodesics are implemented for beta in {GEODESIC_BETAS}, got {self.beta}"
            )

    def _require_bounds_domain(self):
        if self.n < 2 * self.p:
            raise DomainError(f"distance bounds need n >= 2p, got n={self.n}, p={self.p}")

    # ------------------------------------------------------------------
    # tangent space and metric

    def proj(self, X, Z):
        """Euclidean orthogonal projection onto the tangent space at ``X``."""
        self._check_shape(X, Z)
        return Z - X @ sym(X.T @ Z)

    def inner(self, X, U, V):
        """``tr(U^T V) + (beta - 1) tr(U^T X X^T V)``."""
        self._check_shape(X, U, V)
        val = float(np.vdot(U, V))
        if self.beta != 1.0:
            val += (self.beta - 1.0) * float(np.vdot(X.T @ U, X.T @ V))
        return val

    def norm(self, X, U):
        return float(np.sqrt(max(self.inner(X, U, U), 0.0)))

    def egrad_to_rgrad(self, X, G):
        """Riemannian gradient for the beta-metric from a Euclidean gradient."""
        self._check_shape(X, G)
        XtG = X.T @ G
        return X @ skew(XtG) / self.beta + (G - X @ XtG)

    def zero_vector(self, X):
        return np.zeros_like(X)

    # ------------------------------------------------------------------
    # exponential and logarithm

    def _normal_basis(self, X, K):
        """Orthonormal ``Q`` with ``X^T Q = 0`` and ``K = Q B``.

        Householder QR of ``[X, K]`` keeps ``Q`` orthogonal to ``X`` even when
        ``K`` is rank deficient; the unused columns then get zero rows in ``B``.
        """
        k = min(self.p, self.n - self.p)
        Qf, Rf = np.linalg.qr(np.hstack([X, K]))
        Q = Qf[:, self.p:self.p + k]
        B = Rf[self.p:self.p + k, self.p:]
        d = np.sign(np.diag(B))
        d[d == 0] = 1.0
        return Q * d, B * d[:, None]

    def exp(self, X, xi):
        """Riemannian exponential ``Exp_X(xi)``."""
        self._require_geodesic_beta()
        self._check_shape(X, xi)
        p = self.p
        Omega = skew(X.T @ xi)
        K = xi - X @ Omega
        K = K - X @ (X.T @ K)
        Q, B = self._normal_basis(X, K)
        k = Q.shape[1]
        L = np.zeros((p + k, p + k))
        L[:p, :p] = 2.0 * self.beta * Omega
        L[:p, p:] = -B.T
        L[p:, :p] = B
        E = expm_skew(L)
        Y = X @ E[:p, :p] + Q @ E[p:, :p]
        if self.beta != 0.5:
            Y = Y @ expm_skew((1.0 - 2.0 * self.beta) * Omega)
        if orthonormality_error(Y) > ORTHO_TOL:
            Y = polar_orthogonal_factor(Y)
        return Y

    def log(self, X, Y, init=None):
        """Riemannian logarithm ``Log_X(Y)``.

        Parameters
        ----------
        X, Y : ndarray, shape (n, p)
        init : ndarray, shape (n, p), optional
            Warm start for the Euclidean-metric Newton iteration (ignored for
            the canonical metric, whose algebraic iteration needs none).

        Raises
        ------
        LogDivergenceError
            If the iteration does not converge; carries the last residual.
        """
        self._require_geodesic_beta()
        self._check_shape(X, Y)
        if self.beta == 0.5:
            return self._log_canonical(X, Y)
        return self._log_newton(X, Y, init)

    def _log_canonical(self, X, Y):
        p = self.p
        M = X.T @ Y
        K = Y - X @ M
        K = K - X @ (X.T @ K)
        Q, N = self._normal_basis(X, K)
        k = Q.shape[1]
        V = _orthogonal_completion(np.vstack([M, N]))
        resid = np.inf
        for _ in range(self.max_log_iter):
            try:
                L = logm_orthogonal_principal(V)
            except BranchError as exc:
                raise LogDivergenceError(f"logarithm left the principal branch: {exc}", resid) from exc
            C = L[p:, p:]
            prev, resid = resid, float(np.linalg.norm(C))
            # stop at tolerance, or once rounding noise stalls an accurate iterate
            if resid <= self.log_tol or (resid <= TOL_LOG and resid >= prev):
                break
            V[:, p:] = V[:, p:] @ expm_skew(-C)
        else:
            if resid > TOL_LOG:
                raise LogDivergenceError(
                    f"canonical logarithm did not converge in {self.max_log_iter} iterations "
                    f"(residual {resid:.3e})",
                    resid,
                )
        A = skew(L[:p, :p])
        B = L[p:, :p]
        return X @ A + Q @ B

    def _log_newton(self, X, Y, init=None):
        """Shooting by damped Newton-GMRES in the reduced 2p-dimensional frame.

        With ``[X, Q]`` spanning both points, the geodesic endpoint only
        depends on ``(Omega, B)`` through the small matrices ``U = [X Q]^T Y``.
        The residual ``Exp(Omega, B) - U`` is expressed in coordinates of the
        tangent and normal space at ``U`` so that the Newton system is square.
        """
        p, beta = self.p, self.beta
        M = X.T @ Y
        K = Y - X @ M
        K = K - X @ (X.T @ K)
        Q, N = self._normal_basis(X, K)
        k = Q.shape[1]
        U = np.vstack([M, N])
        iu = np.triu_indices(p, 1)
        n_om = len(iu[0])

        def pack(Om, B):
            return np.concatenate([Om[iu], B.ravel()])

        def unpack(v):
            Om = np.zeros((p, p))
            Om[iu] = v[:n_om]
            return Om - Om.T, v[n_om:].reshape(k, p)

        def generator(Om, B):
            L = np.zeros((p + k, p + k))
            L[:p, :p] = 2.0 * beta * Om
            L[:p, p:] = -B.T
            L[p:, :p] = B
            return L

        def coords(D, Ut, Ut_perp):
            return pack(skew(Ut.T @ D), Ut_perp.T @ D)

        def endpoint(v):
            Om, B = unpack(v)
            eL = SkewExponential(generator(Om, B))
            eR = SkewExponential((1.0 - 2.0 * beta) * Om)
            Y1 = eL.value[:, :p] @ eR.value
            return Y1, (eL, eR)

        def solve(v, Ut=U):
            Ut_perp = np.linalg.qr(Ut, mode="complete")[0][:, p:]
            Y1, fac = endpoint(v)
            resid = float(np.linalg.norm(Y1 - Ut))
            for _ in range(NEWTON_MAX_ITER):
                if resid <= self.log_tol:
                    break
                eL, eR = fac

                def jvp(dv, eL=eL, eR=eR):
                    dOm, dB = unpack(dv)
                    dY = eL.frechet(generator(dOm, dB))[:, :p] @ eR.value
                    if beta != 0.5:
                        dY += eL.value[:, :p] @ eR.frechet((1.0 - 2.0 * beta) * dOm)
                    return coords(dY, Ut, Ut_perp)

                J = spla.LinearOperator((v.size, v.size), matvec=jvp, dtype=np.float64)
                step, _ = spla.gmres(J, -coords(Y1 - Ut, Ut, Ut_perp), rtol=0.1 * min(0.1, resid),
                                     atol=0.0, restart=GMRES_RESTART, maxiter=GMRES_MAXITER)
                t = 1.0
                while True:
                    v_new = v + t * step
                    Y1_new, fac_new = endpoint(v_new)
                    r_new = float(np.linalg.norm(Y1_new - Ut))
                    if r_new < resid or t < NEWTON_MIN_STEP:
                        break
                    t *= 0.5
                if r_new >= resid:
                    break
                v, Y1, fac, resid = v_new, Y1_new, fac_new, r_new
            return v, resid

        def continuation(A, B):
            # move the target along the canonical geodesic X -> Y (which stays
            # in the [X, Q] frame), warm-starting each Newton solve
            Lc = np.zeros((p + k, p + k))
            Lc[:p, :p], Lc[:p, p:], Lc[p:, :p] = A, -B.T, B
            s_dir = pack(A, B)
            v, s, ds = s_dir, 0.0, 0.125
            while s < 1.0 and ds >= CONTINUATION_MIN_STEP:
                s_new = min(1.0, s + ds)
                v_try = s_new * s_dir if s == 0.0 else v * (s_new / s)
                v_new, resid = solve(v_try, expm_skew(s_new * Lc)[:, :p])
                if resid <= TOL_LOG:
                    v, s = v_new, s_new
                else:
                    ds *= 0.5
            return v, (resid if s == 1.0 else np.inf)

        bound_cap = np.inf
        if self.n >= 2 * p:
            bound_cap = self.bound_upper(X, Y) * (1.0 + 1e-9) + 1e-12
        if init is not None:
            v, resid = solve(pack(skew(X.T @ init), Q.T @ init))
            if resid <= TOL_LOG and _beta_norm(v, n_om, beta) <= bound_cap:
                Om, B = unpack(v)
                return X @ Om + Q @ B
        # Minimality guard. g_{1/2} <= g_1 <= 2 g_{1/2}, so a canonical geodesic of
        # length l certifies d_1 <= sqrt(2) l; for n >= 2p the chordal upper
        # bound applies as well. A longer Newton solution is not minimal.
        canon = Stiefel(self.n, p, 0.5, self.log_tol, self.max_log_iter)
        try:
            xi_c = canon._log_canonical(X, Y)
            cap = np.sqrt(2.0) * canon.norm(X, xi_c)
        except LogDivergenceError:
            xi_c, cap = None, np.inf
        cap = min(cap * (1.0 + 1e-9) + 1e-12, bound_cap)
        starts = [pack(skew(M), N)]
        if xi_c is not None:
            starts.append(pack(skew(X.T @ xi_c), Q.T @ xi_c))
        for v0 in starts:
            v, resid = solve(v0)
            if resid <= TOL_LOG and _beta_norm(v, n_om, beta) <= cap:
                break
        else:
            if xi_c is not None:
                v, resid = continuation(skew(X.T @ xi_c), Q.T @ xi_c)
        if resid <= TOL_LOG and _beta_norm(v, n_om, beta) > cap:
            raise LogDivergenceError(
                "Euclidean-metric logarithm only found a non-minimal geodesic", resid
            )
        if resid > TOL_LOG:
            raise LogDivergenceError(
                f"Euclidean-metric logarithm did not converge (residual {resid:.3e})", resid
            )
        Om, B = unpack(v)
        return X @ Om + Q @ B

    def dist(self, X, Y):
        """Geodesic distance, computed as the norm of ``Log_X(Y)``."""
        return self.norm(X, self.log(X, Y))

    # ------------------------------------------------------------------
    # retraction, lifting map and projection

    def retr(self, X, xi):
        """QR retraction: Q factor of ``X + xi`` with positive ``R`` diagonal."""
        self._check_shape(X, xi)
        Q, _ = thin_qr_signfix(X + xi)
        return Q

    def lift(self, X, Y):
        """Orthographic lifting map ``Proj_{T_X}(Y - X)``."""
        return self.proj(X, Y - X)

    def project(self, M):
        """Closest point of St(n, p) to ``M`` in Frobenius norm."""
        self._check_shape(M)
        return polar_orthogonal_factor(M)

    # ------------------------------------------------------------------
    # distance bounds

    @staticmethod
    def chordal(X, Y):
        return float(np.linalg.norm(X - Y))

    @property
    def lower_factor(self):
        return min(1.0, np.sqrt(self.beta))

    @property
    def upper_factor(self):
        return max(1.0, np.sqrt(self.beta))

    def bound_lower_from_chordal(self, u):
        self._require_bounds_domain()
        s = 2.0 * np.sqrt(self.p)
        return self.lower_factor * s * np.arcsin(np.minimum(np.asarray(u) / s, 1.0))

    def bound_upper_from_chordal(self, u):
        self._require_bounds_domain()
        u = np.asarray(u, dtype=np.float64)
        arc = 2.0 * np.arcsin(np.minimum(u, 2.0) / 2.0)
        return self.upper_factor * np.where(u <= 2.0, arc, 0.5 * np.pi * u)

    def bound_lower(self, X, Y):
        """Lower bound on the geodesic distance from the chordal distance."""
        return float(self.bound_lower_from_chordal(self.chordal(X, Y)))

    def bound_upper(self, X, Y):
        """Upper bound on the geodesic distance from the chordal distance."""
        return float(self.bound_upper_from_chordal(self.chordal(X, Y)))

    # ------------------------------------------------------------------
    # random generation

    def random_point(self, rng):
        """Haar-distributed point: sign-fixed Q factor of a Gaussian matrix."""
        Q, _ = thin_qr_signfix(rng.standard_normal((self.n, self.p)))
        return Q

    def random_tangent(self, X, rng):
        """Tangent vector at ``X``, isotropic for the beta-metric, unit norm."""
        p = self.p
        W = rng.standard_normal((p, p))
        Omega = (W - W.T) / (2.0 * np.sqrt(self.beta))
        G = rng.standard_normal((self.n, p))
        K = G - X @ (X.T @ G)
        xi = X @ Omega + K
        return xi / self.norm(X, xi)


def _orthogonal_completion(U):
    """Complete ``U`` (m x p, orthonormal columns) to V in SO(m).

    The completion block is rotated so that its lower-right block is
    symmetric positive semi-definite, which keeps the generator of ``V``
    small; the last column is flipped if needed to land in SO(m).
    """
    m, p = U.shape
    Qf, _ = np.linalg.qr(U, mode="complete")
    W = Qf[:, p:]
    if m > p:
        Ua, _, Vat = np.linalg.svd(W[p:, :])
        W = W @ (Vat.T @ Ua.T)
        V = np.hstack([U, W])
        if np.linalg.det(V) < 0:
            # flip along the weakest direction of the symmetric lower block
            u = Ua[:, -1:]
            V[:, p:] = V[:, p:] - 2.0 * (V[:, p:] @ u) @ u.T
        return V
    return U.copy()


def _beta_norm(v, n_om, beta):
    # packed (Omega upper triangle, B) coordinates: |xi|^2 = 2 beta |Om_upper|^2 + |B|^2
    return float(np.sqrt(2.0 * beta * np.dot(v[:n_om], v[:n_om]) + np.dot(v[n_om:], v[n_om:])))
