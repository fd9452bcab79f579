import numpy as np
import pytest

from stiefel_barycenter import (
    Algorithm,
    Dataset,
    InvalidArgumentError,
    SolverConfig,
    objective_exact,
    sample_clustered,
    solve,
    stationarity_residual,
)
from stiefel_barycenter._parallel import pairwise_sum, serial
from stiefel_barycenter.solvers import euclidean_mean_projection, fixed_point_direction

ALL = tuple(Algorithm)


@pytest.mark.parametrize("algo", ALL)
def test_singleton_returns_point(algo):
    ds = sample_clustered(6, 2, 1, 1.0, radius=1.0, seed=3)
    res = solve(ds, SolverConfig(algo=algo, nu=2.0))
    np.testing.assert_allclose(res.point, ds.points[0], atol=1e-12)
    assert res.converged and res.iterations <= 1


@pytest.mark.parametrize("algo", (Algorithm.A1, Algorithm.A2_LOWER, Algorithm.A3))
def test_sphere_midpoint(algo):
    # two points on a great circle of S^3: the l^2 barycenter is the midpoint
    x = np.array([[1.0], [0.0], [0.0], [0.0]])
    a = 1.2
    y = np.array([[np.cos(a)], [np.sin(a)], [0.0], [0.0]])
    ds = Dataset(4, 1, 1.0, np.stack([x, y]))
    # step 1/(2N) is the Karcher step for nu = 2; the default 1/N overshoots
    cfg = SolverConfig(algo=algo, nu=2.0, epsilon=1e-12, init=0, step_init=0.25)
    res = solve(ds, cfg)
    mid = np.array([[np.cos(a / 2)], [np.sin(a / 2)], [0.0], [0.0]])
    # on the sphere the chordal bounds are exact, so every variant is tight
    np.testing.assert_allclose(res.point, mid, atol=1e-5)


def test_a1_descent_and_stationarity():
    ds = sample_clustered(8, 3, 5, 1.0, radius=2.0, seed=7)
    res = solve(ds, SolverConfig(algo=Algorithm.A1, nu=2.0, epsilon=1e-10))
    vals = [r.objective_internal for r in res.trace]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert res.converged
    assert stationarity_residual(ds, 2.0, res.point) <= 1e-3
    assert res.f_nu == pytest.approx(objective_exact(ds, 2.0, res.point), rel=1e-9)


@pytest.mark.parametrize("algo", (Algorithm.A2_LOWER, Algorithm.A2_UPPER))
def test_a2_descent(algo):
    ds = sample_clustered(8, 3, 5, 0.5, radius=2.0, seed=8)
    res = solve(ds, SolverConfig(algo=algo, nu=1.0))
    vals = [r.objective_internal for r in res.trace]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert res.converged


@pytest.mark.parametrize("algo", ALL)
def test_orthogonal_equivariance(algo):
    ds = sample_clustered(7, 2, 4, 0.5, radius=1.5, seed=9)
    Q = np.linalg.qr(np.random.default_rng(0).standard_normal((7, 7)))[0]
    ds_rot = Dataset(7, 2, 0.5, np.einsum("ij,kjl->kil", Q, ds.points))
    cfg = SolverConfig(algo=algo, nu=2.0, max_iter=50)
    a, b = solve(ds, cfg), solve(ds_rot, cfg)
    np.testing.assert_allclose(Q @ a.point, b.point, atol=1e-8)


def test_a3_literal_and_normalized_agree_for_nu2():
    # with nu = 2 all weights equal 2, so both variants share their fixed points
    ds = sample_clustered(8, 2, 5, 1.0, radius=1.0, seed=10)
    a = solve(ds, SolverConfig(algo=Algorithm.A3, nu=2.0, epsilon=1e-12))
    b = solve(ds, SolverConfig(algo=Algorithm.A3, nu=2.0, epsilon=1e-12, a3_normalized=False))
    assert a.converged and b.converged
    np.testing.assert_allclose(fixed_point_direction(ds, 2.0, a.point), 0.0, atol=1e-6)
    np.testing.assert_allclose(fixed_point_direction(ds, 2.0, b.point), 0.0, atol=1e-6)


def test_a3_ambient_mean_fixed_point():
    # for nu = 2 the fixed point is where the tangent projection of the mean vanishes
    ds = sample_clustered(9, 3, 6, 0.5, radius=1.0, seed=11)
    res = solve(ds, SolverConfig(algo=Algorithm.A3, nu=2.0, epsilon=1e-14))
    M = ds.manifold
    mean = ds.points.mean(axis=0)
    np.testing.assert_allclose(M.proj(res.point, mean), 0.0, atol=1e-6)


def test_antipodal_fallback():
    x = np.array([[1.0], [0.0], [0.0]])
    ds = Dataset(3, 1, 1.0, np.stack([x, -x]))
    X, fell_back = euclidean_mean_projection(ds)
    assert fell_back
    np.testing.assert_array_equal(X, x)
    res = solve(ds, SolverConfig(algo=Algorithm.A2_LOWER, nu=2.0))
    assert res.init_fallback
    # the exact objective at a cut point has no logarithm: reported, not raised
    assert res.f_nu is None and res.notes


def test_identical_points():
    X = np.eye(6)[:, :2]
    ds = Dataset(6, 2, 1.0, np.stack([X] * 4))
    for algo in ALL:
        res = solve(ds, SolverConfig(algo=algo, nu=1.0))
        assert res.f_nu == 0.0 and res.converged
        np.testing.assert_allclose(res.point, X, atol=1e-14)


def test_max_iter_status():
    ds = sample_clustered(8, 3, 5, 1.0, radius=2.0, seed=12)
    res = solve(ds, SolverConfig(algo=Algorithm.A2_LOWER, nu=1.0, epsilon=1e-15, max_iter=2))
    assert res.status == "max_iter" and not res.converged and res.iterations == 2


def test_exact_trace():
    ds = sample_clustered(8, 3, 4, 0.5, radius=2.0, seed=13)
    res = solve(ds, SolverConfig(algo=Algorithm.A3, nu=2.0, exact_trace=True))
    assert all(r.f_nu is not None for r in res.trace)
    res = solve(ds, SolverConfig(algo=Algorithm.A3, nu=2.0))
    assert all(r.f_nu is None for r in res.trace)


def test_config_validation():
    with pytest.raises(InvalidArgumentError):
        SolverConfig(nu=0.5)
    with pytest.raises(InvalidArgumentError):
        SolverConfig(epsilon=0.0)
    with pytest.raises(InvalidArgumentError):
        SolverConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolverConfig(algo="A9")
    ds = sample_clustered(6, 2, 3, 1.0, radius=1.0, seed=0)
    with pytest.raises(InvalidArgumentError):
        solve(ds, SolverConfig(init=5))


def test_thread_count_does_not_change_bits(monkeypatch):
    ds = sample_clustered(8, 3, 7, 1.0, radius=2.0, seed=14)
    cfg = SolverConfig(algo=Algorithm.A1, nu=1.0, max_iter=5)
    with serial():
        a = solve(ds, cfg)
    monkeypatch.setenv("STIEFEL_BARYCENTER_THREADS", "4")
    b = solve(ds, cfg)
    np.testing.assert_array_equal(a.point, b.point)
    assert a.f_nu == b.f_nu


def test_pairwise_sum_fixed_order():
    vals = [0.1 * k for k in range(7)]
    assert pairwise_sum(vals) == ((vals[0] + vals[1]) + (vals[2] + vals[3])) + (
        (vals[4] + vals[5]) + vals[6])
    assert pairwise_sum([]) == 0.0
