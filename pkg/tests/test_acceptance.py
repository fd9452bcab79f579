"""Acceptance criteria 1-9.

Each test prints one ``criterion k: PASS|FAIL`` line (also collected into the
terminal summary) and then asserts. Criteria 6-8 take minutes. Run the
module directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, fd_gradient
from stiefel_barycenter import (
    Algorithm,
    Dataset,
    SolverConfig,
    Stiefel,
    bounds_report,
    objective_exact,
    objective_lower,
    objective_upper,
    riemannian_gradient_exact,
    riemannian_gradient_lower,
    riemannian_gradient_upper,
    sample_clustered,
    solve,
)
from stiefel_barycenter.experiments import TABLE_ROWS, bench, run_table_row
from stiefel_barycenter.solvers import euclidean_mean_projection

BETAS = (0.5, 1.0)


def report(crit, ok, detail):
    ACCEPTANCE_LINES.append((crit, bool(ok), detail))
    print(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# ----------------------------------------------------------------------
# 1. bound sandwich


def test_criterion_1_bound_sandwich():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst_lo, worst_up, pairs = np.inf, np.inf, 0
    for n, p in ((6, 2), (10, 3), (20, 5)):
        for beta in BETAS:
            M = Stiefel(n, p, beta)
            for k in range(170):
                X = M.random_point(rng)
                if k % 2:
                    Y = M.random_point(rng)
                else:
                    Y = M.exp(X, rng.uniform(0.05, 3.0) * M.random_tangent(X, rng))
                d = M.dist(X, Y)
                worst_lo = min(worst_lo, d - M.bound_lower(X, Y))
                worst_up = min(worst_up, M.bound_upper(X, Y) - d)
                pairs += 1
    dt = time.perf_counter() - t0
    ok = pairs >= 1000 and worst_lo >= -1e-7 and worst_up >= -1e-7 and dt < 60
    report(1, ok, f"{pairs} pairs, min lower slack {worst_lo:.2e}, min upper slack "
                  f"{worst_up:.2e}, {dt:.1f}s")


# ----------------------------------------------------------------------
# 2. sphere tightness


def test_criterion_2_sphere_tightness():
    rng = np.random.default_rng(2)
    worst = 0.0
    count = 0
    for n in (2, 3, 5, 10):
        M = Stiefel(n, 1, 1.0)
        for _ in range(50):
            # unit vectors: the chordal distance never exceeds 2
            x, y = M.random_point(rng), M.random_point(rng)
            u = M.chordal(x, y)
            d = 2.0 * np.arcsin(min(u, 2.0) / 2.0)
            worst = max(worst, abs(M.bound_lower(x, y) - d), abs(M.bound_upper(x, y) - d))
            count += 1
    ok = count == 200 and worst <= 1e-10
    report(2, ok, f"{count} pairs, max |bound - great-circle distance| = {worst:.2e}")


# ----------------------------------------------------------------------
# 3. exp/log roundtrips


def test_criterion_3_roundtrips():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst_exp_log, worst_log_exp, trials = 0.0, 0.0, 0
    shapes = ((5, 2), (8, 3), (12, 4), (20, 5))
    for beta in BETAS:
        for k in range(100):
            n, p = shapes[k % len(shapes)]
            M = Stiefel(n, p, beta)
            X = M.random_point(rng)
            xi = rng.uniform(0.0, 1.0) * M.random_tangent(X, rng)
            Y = M.exp(X, xi)
            worst_log_exp = max(worst_log_exp, np.linalg.norm(M.log(X, Y) - xi))
            worst_exp_log = max(worst_exp_log, np.linalg.norm(M.exp(X, M.log(X, Y)) - Y))
            trials += 1
    dt = time.perf_counter() - t0
    ok = worst_exp_log <= 1e-7 and worst_log_exp <= 1e-7 and dt < 60
    report(3, ok, f"{trials} trials, max |Log(Exp(xi)) - xi| = {worst_log_exp:.2e}, "
                  f"max |Exp(Log(Y)) - Y| = {worst_exp_log:.2e}, {dt:.1f}s")


# ----------------------------------------------------------------------
# 4. gradient correctness


def test_criterion_4_gradients():
    t0 = time.perf_counter()
    worst = 0.0
    configs = 0
    shapes = ((6, 2), (8, 3), (10, 3), (9, 4))
    for c in range(20):
        n, p = shapes[c % len(shapes)]
        beta = BETAS[c % 2]
        ds = sample_clustered(n, p, 3 + c % 3, beta, radius=1.5, seed=400 + c)
        M = ds.manifold
        rng = np.random.default_rng(c)
        X = M.exp(ds.points[0], 0.4 * M.random_tangent(ds.points[0], rng))
        for nu in (1.0, 2.0, 3.0):
            for grad, obj in ((riemannian_gradient_exact, objective_exact),
                              (riemannian_gradient_lower, objective_lower),
                              (riemannian_gradient_upper, objective_upper)):
                G = grad(ds, nu, X)
                G_fd = fd_gradient(M, X, lambda Z: obj(ds, nu, Z) ** nu, h=1e-6)
                worst = max(worst, M.norm(X, G - G_fd) / M.norm(X, G))
        configs += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-5 and dt < 120
    report(4, ok, f"{configs} configurations x nu in {{1,2,3}} x 3 gradients, max relative "
                  f"error {worst:.2e}, {dt:.1f}s")


# ----------------------------------------------------------------------
# 5. retraction and lifting-map orders


def test_criterion_5_orders():
    rng = np.random.default_rng(5)
    ts = np.array([1e-1, 1e-2, 1e-3])
    min_retr_slope, min_lift_slope, lift_monotone = np.inf, np.inf, True
    for beta in BETAS:
        for n, p in ((6, 2), (10, 3), (15, 5)):
            M = Stiefel(n, p, beta)
            for _ in range(3):
                X = M.random_point(rng)
                xi = M.random_tangent(X, rng)
                e_retr = [np.linalg.norm(M.retr(X, t * xi) - M.exp(X, t * xi)) for t in ts]
                e_lift = [np.linalg.norm(M.lift(X, M.exp(X, t * xi)) - t * xi) / t for t in ts]
                min_retr_slope = min(min_retr_slope, np.polyfit(np.log(ts), np.log(e_retr), 1)[0])
                min_lift_slope = min(min_lift_slope, np.polyfit(np.log(ts), np.log(e_lift), 1)[0])
                lift_monotone &= bool(np.all(np.diff(e_lift) < 0))
    ok = min_retr_slope >= 1.9 and min_lift_slope >= 0.9 and lift_monotone
    report(5, ok, f"min retraction slope {min_retr_slope:.3f}, min slope of lift error / t "
                  f"{min_lift_slope:.3f} (decreasing: {lift_monotone})")


# ----------------------------------------------------------------------
# 6. certificate bracket


@pytest.mark.slow
def test_criterion_6_certificate_bracket():
    t0 = time.perf_counter()
    violations, cases, max_ratio = [], 0, 0.0
    for beta in BETAS:
        for nu in (1.0, 2.0):
            for s in range(10):
                ds = sample_clustered(20, 8, 5, beta, seed=600 + s)
                x_star = solve(ds, SolverConfig(algo=Algorithm.A1, nu=nu))
                y_star = solve(ds, SolverConfig(algo=Algorithm.A2_LOWER, nu=nu))
                rep = bounds_report(ds, nu, y_star.point, reference=x_star.point,
                                    f_nu=y_star.f_nu)
                violations += [(beta, nu, s, v) for v in rep.violations]
                max_ratio = max(max_ratio, rep.thm1_lhs / rep.thm1_rhs)
                cases += 1
    dt = time.perf_counter() - t0
    ok = not violations and dt < 600
    report(6, ok, f"{cases} cases, {len(violations)} violations, max gap/certificate "
                  f"{max_ratio:.2e}, {dt:.0f}s")


# ----------------------------------------------------------------------
# 7. table reproduction


_TABLE_CACHE = {}


def _table(row, scale):
    key = (row, scale)
    if key not in _TABLE_CACHE:
        t0 = time.perf_counter()
        summary, outcomes = run_table_row(TABLE_ROWS[row].scaled(scale), runs=10, seed=row)
        _TABLE_CACHE[key] = summary, outcomes, time.perf_counter() - t0
    return _TABLE_CACHE[key]


def _within(summary, ref, band=0.15):
    devs = [(summary[c] - r) / r for c, r in zip(("f_X", "f_Y", "f_Z"), ref)]
    return all(abs(d) <= band for d in devs), devs


@pytest.mark.slow
def test_criterion_7_table():
    details, ok = [], True
    total = 0.0
    for row in (1, 2):
        summary, outs, dt = _table(row, 1)
        total += dt
        band_ok, devs = _within(summary, TABLE_ROWS[row].reference)
        ineq = all(o.gap_ok for o in outs) and all(o.dist_ok for o in outs)
        ok &= band_ok and ineq
        details.append(
            f"row {row}: f = ({summary['f_X']:.4g}, {summary['f_Y']:.4g}, {summary['f_Z']:.4g}) "
            f"dev ({', '.join(f'{d:+.1%}' for d in devs)}), gap {summary['gap']:.2e} <= "
            f"{summary['thm1']:.3g} in every run: {ineq}"
        )
    for row in (3, 4):
        summary, outs, dt = _table(row, 2)
        total += dt
        ineq = all(o.gap_ok for o in outs) and all(o.dist_ok for o in outs)
        ok &= ineq
        details.append(f"row {row} (scale 2): inequalities in every run: {ineq}")
    ok &= total < 1800
    report(7, ok, "; ".join(details) + f"; {total:.0f}s")


# ----------------------------------------------------------------------
# 8. timing


@pytest.mark.slow
def test_criterion_8_timing():
    rows = bench(n=140, p_list=(20,), N=5, nu=2.0, beta=0.5, reps=5, seed=8)
    t = {algo: ms for _, algo, ms in rows}
    a1, a2, a3 = t["A1"], t["A2_lower"], t["A3"]
    ok = a1 >= 10 * a2 and a1 >= 10 * a3 and max(a2, a3) <= 5 * min(a2, a3)
    report(8, ok, f"p=20 medians: A1 {a1:.1f} ms, A2 {a2:.2f} ms, A3 {a3:.2f} ms; "
                  f"A1/A2 {a1 / a2:.0f}x, A1/A3 {a1 / a3:.0f}x, A2/A3 {a2 / a3:.2f}")


# ----------------------------------------------------------------------
# 9. degenerate and edge cases


def test_criterion_9_edge_cases():
    checks = {}
    # N = 1
    ds = sample_clustered(8, 3, 1, 1.0, radius=1.0, seed=9)
    checks["singleton"] = all(
        np.allclose(solve(ds, SolverConfig(algo=a, nu=nu)).point, ds.points[0], atol=1e-12)
        for a in Algorithm for nu in (1.0, 2.0)
    )
    # identical points
    X = ds.points[0]
    same = Dataset(8, 3, 1.0, np.stack([X] * 4))
    res = [solve(same, SolverConfig(algo=a, nu=nu)) for a in Algorithm for nu in (1.0, 2.0)]
    # zero up to the rounding of the polar factor of the (exact) ambient mean
    checks["identical"] = all(max(r.f_nu, r.f_hat, r.F_hat) <= 1e-12 for r in res)
    # antipodal mean: fallback to point 0, solvers still run
    x = np.eye(4)[:, :1]
    anti = Dataset(4, 1, 1.0, np.stack([x, -x]))
    _, fell_back = euclidean_mean_projection(anti)
    runs = [solve(anti, SolverConfig(algo=a, nu=2.0, compute_exact=False))
            for a in (Algorithm.A2_LOWER, Algorithm.A3)]
    checks["antipodal"] = fell_back and all(r.init_fallback for r in runs)
    # nu = 1 starting on a data point never divides by zero
    ds = sample_clustered(8, 3, 4, 0.5, radius=1.5, seed=19)
    with np.errstate(all="raise"):
        nu1 = [solve(ds, SolverConfig(algo=a, nu=1.0, init=0)) for a in Algorithm]
    checks["nu=1"] = all(np.all(np.isfinite(r.point)) and np.isfinite(r.f_nu) for r in nu1)
    ok = all(checks.values())
    report(9, ok, ", ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in checks.items()))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
