"""Dense linear-algebra kernels: skew exponentials, orthogonal logarithms,
sign-fixed thin QR and the polar factor.

All routines work on float64 arrays and never modify their inputs.
"""

import numpy as np
import scipy.linalg

from .errors import BranchError, InvalidArgumentError, RankError

SKEW_TOL = 1e-12
ORTHO_TOL = 1e-10
BRANCH_TOL = 1e-10
RANK_TOL = 1e-12


def _as_square(A, name="A"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def skew(M):
    """Skew-symmetric part ``(M - M^T) / 2``."""
    return 0.5 * (M - M.T)


def sym(M):
    """Symmetric part ``(M + M^T) / 2``."""
    return 0.5 * (M + M.T)


def is_skew(A, tol=SKEW_TOL):
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    return float(np.max(np.abs(A + A.T), initial=0.0)) <= tol * scale


def orthonormality_error(Q):
    """Max-norm deviation of ``Q^T Q`` from the identity."""
    Q = np.asarray(Q, dtype=np.float64)
    return float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[1])), initial=0.0))


def expm_skew(A):
    """Matrix exponential of a skew-symmetric matrix.

    Uses scaling and squaring with a Pade approximant. The result is
    orthogonal with unit determinant; it is re-orthonormalized through its
    polar factor if rounding drift exceeds ``1e-10``.

    Parameters
    ----------
    A : ndarray, shape (m, m)
        Skew-symmetric matrix.

    Returns
    -------
    O : ndarray, shape (m, m)
        ``exp(A)``.
    """
    A = _as_square(A)
    if not is_skew(A):
        raise InvalidArgumentError("expm_skew requires a skew-symmetric matrix")
    if A.shape[0] == 0:
        return np.eye(0)
    O = scipy.linalg.expm(A)
    if orthonormality_error(O) > ORTHO_TOL:
        O = polar_orthogonal_factor(O)
    return O


def logm_orthogonal_principal(O):
    """Principal logarithm of an orthogonal matrix.

    The real Schur form of an orthogonal matrix is block diagonal with
    1x1 blocks equal to +-1 and 2x2 rotation blocks; each rotation block is
    replaced by its angle generator and the result is transformed back.

    Parameters
    ----------
    O : ndarray, shape (m, m)
        Orthogonal matrix without eigenvalue -1.

    Returns
    -------
    A : ndarray, shape (m, m)
        Skew-symmetric matrix with ``expm_skew(A) == O``.

    Raises
    ------
    InvalidArgumentError
        If ``O`` is not orthogonal to ``1e-10``.
    BranchError
        If ``O`` has an eigenvalue within ``1e-10`` of -1.
    """
    O = _as_square(O, "O")
    m = O.shape[0]
    if orthonormality_error(O) > ORTHO_TOL:
        raise InvalidArgumentError("logm_orthogonal_principal requires an orthogonal matrix")
    if m == 0:
        return np.zeros((0, 0))
    T, Z = scipy.linalg.schur(O, output="real")
    L = np.zeros_like(T)
    i = 0
    while i < m:
        if i + 1 < m and T[i + 1, i] != 0.0:
            a = 0.5 * (T[i, i] + T[i + 1, i + 1])
            s = 0.5 * (T[i + 1, i] - T[i, i + 1])
            theta = np.arctan2(s, a)
            if np.pi - abs(theta) < BRANCH_TOL:
                raise BranchError("orthogonal matrix has an eigenvalue at -1")
            L[i + 1, i] = theta
            L[i, i + 1] = -theta
            i += 2
        else:
            # real eigenvalues of an orthogonal matrix are +-1
            if T[i, i] < 0.0:
                raise BranchError("orthogonal matrix has an eigenvalue at -1")
            i += 1
    return skew(Z @ L @ Z.T)


def _qr_positive(M):
    Q, R = np.linalg.qr(M, mode="reduced")
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d, R * d[:, None]


def thin_qr_signfix(M):
    """Thin QR factorization with a positive diagonal in ``R``.

    Parameters
    ----------
    M : ndarray, shape (m, k)
        Full-column-rank matrix, ``k <= m``.

    Returns
    -------
    Q : ndarray, shape (m, k)
    R : ndarray, shape (k, k)
        Upper triangular with strictly positive diagonal.

    Raises
    ------
    RankError
        If the smallest singular value of ``M`` is at most ``1e-12``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] > M.shape[0]:
        raise InvalidArgumentError(f"thin_qr_signfix expects a tall matrix, got shape {M.shape}")
    Q, R = _qr_positive(M)
    sv = np.linalg.svd(R, compute_uv=False)
    if sv.size and sv[-1] <= RANK_TOL * max(1.0, sv[0]):
        raise RankError(f"matrix is rank deficient (smallest singular value {sv[-1]:.3e})")
    return Q, R


def polar_orthogonal_factor(M):
    """Orthogonal factor ``U V^T`` of the polar decomposition of ``M``.

    This is the nearest matrix with orthonormal columns in Frobenius norm.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[1] > M.shape[0]:
        raise InvalidArgumentError(f"polar_orthogonal_factor expects a tall matrix, got shape {M.shape}")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    if s.size and s[-1] <= RANK_TOL * max(1.0, s[0]):
        raise RankError(f"polar factor is not unique (smallest singular value {s[-1]:.3e})")
    return U @ Vt


class SkewExponential:
    """Exponential of a skew matrix together with its Frechet derivative.

    ``i * S`` is Hermitian, so ``S = W diag(-i mu) W^H`` with ``W`` unitary and
    ``D exp(S)[H] = W (Phi * (W^H H W)) W^H`` where ``Phi`` holds the divided
    differences of ``exp`` at the eigenvalues. Building the factorization once
    makes every directional derivative a handful of small matrix products.
    """

    def __init__(self, S):
        S = _as_square(S, "S")
        mu, W = np.linalg.eigh(1j * S)
        self._W = W
        self._Wh = W.conj().T
        # exp(-i mu_k) - exp(-i mu_l) over the eigenvalue gap, written with sinc
        # so that equal eigenvalues need no special case
        gap = mu[None, :] - mu[:, None]
        self._phi = np.exp(-0.5j * (mu[:, None] + mu[None, :])) * np.sinc(gap / (2.0 * np.pi))
        self.value = ((W * np.exp(-1j * mu)) @ self._Wh).real

    def frechet(self, H):
        """Directional derivative of ``expm`` at ``S`` along ``H``."""
        return (self._W @ (self._phi * (self._Wh @ H @ self._W)) @ self._Wh).real
