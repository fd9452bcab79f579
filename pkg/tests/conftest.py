import numpy as np
import pytest

from stiefel_barycenter import Stiefel

# (criterion, passed, detail) lines filled in by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def tangent_basis(M, X):
    """beta-orthonormal basis of T_X St(n, p), as a list of (n, p) arrays."""
    n, p, beta = M.n, M.p, M.beta
    X_perp = np.linalg.qr(X, mode="complete")[0][:, p:]
    basis = []
    for i in range(p):
        for j in range(i + 1, p):
            Om = np.zeros((p, p))
            Om[i, j], Om[j, i] = 1.0, -1.0
            basis.append(X @ Om / np.sqrt(2.0 * beta))
    for k in range(n - p):
        for l in range(p):
            B = np.zeros((n - p, p))
            B[k, l] = 1.0
            basis.append(X_perp @ B)
    return basis


def fd_gradient(M, X, f, h=1e-6):
    """Central-difference Riemannian gradient along QR-retraction curves."""
    basis = tangent_basis(M, X)
    G = np.zeros_like(X)
    for E in basis:
        d = (f(M.retr(X, h * E)) - f(M.retr(X, -h * E))) / (2.0 * h)
        G += d * E
    return G


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for crit, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def small_manifold():
    return Stiefel(6, 2, beta=1.0)
