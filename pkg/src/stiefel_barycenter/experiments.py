"""Averaged barycenter comparisons and timing runs.

``TABLE_ROWS`` holds the four standard configurations. Each run samples a
dataset, solves with A1 (reference ``X*``), A2_lower (``Y*``) and A3
(``Z*``) from the shared polar-mean start, and checks the certificates of
``Y*`` against ``X*``.
"""

import logging
import math
import statistics
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ._parallel import serial
from .certificates import bounds_report
from .sampling import sample_clustered, sample_uniform
from .solvers import Algorithm, SolverConfig, solve

log = logging.getLogger(__name__)

# Clustered sampling radius per beta: the injectivity radius for the
# Euclidean metric and the conjectured one for the canonical metric.
INJECTIVITY_RADIUS = {1.0: math.pi, 0.5: 0.89 * math.pi}


@dataclass(frozen=True)
class TableRow:
    row: int
    N: int
    n: int
    p: int
    beta: float
    nu: float
    kind: str
    reference: Optional[tuple] = None  # published (f_X, f_Y, f_Z) means

    def scaled(self, scale):
        if scale == 1:
            return self
        n, p = self.n // scale, self.p // scale
        if p < 1 or n < 2 * p:
            raise ValueError(f"scale {scale} leaves an invalid shape ({n}, {p})")
        return replace(self, n=n, p=p, reference=None)


TABLE_ROWS = {
    1: TableRow(1, 5, 50, 20, 1.0, 1.0, "clustered", (4.384, 4.384, 4.384)),
    2: TableRow(2, 5, 50, 20, 1.0, 2.0, "spread", (11.59, 11.66, 11.66)),
    3: TableRow(3, 10, 100, 40, 0.5, 1.0, "clustered"),
    4: TableRow(4, 10, 100, 40, 0.5, 2.0, "spread"),
}

TABLE_COLUMNS = (
    "row", "n", "p", "N", "beta", "nu", "kind", "runs",
    "f_X", "f_Y", "f_Z", "gap", "thm1", "dist", "thm2", "thm3",
    "gap_ok_all_runs", "dist_ok_all_runs",
)


@dataclass
class RunOutcome:
    seed: int
    f_X: float
    f_Y: float
    f_Z: float
    gap: float
    thm1: float
    dist: float
    thm2: float
    thm3: float
    converged: dict = field(default_factory=dict)

    @property
    def gap_ok(self):
        return self.gap <= self.thm1

    @property
    def dist_ok(self):
        return self.thm3 <= self.dist + 1e-7 and self.dist <= self.thm2


def run_seed(seed, run):
    """Dataset seed for run ``run`` of a table drawn with master ``seed``."""
    return int(np.random.SeedSequence([seed, run]).generate_state(1, np.uint64)[0])


def sample_row(spec, seed, radius=None):
    if spec.kind == "spread":
        return sample_uniform(spec.n, spec.p, spec.N, seed, beta=spec.beta)
    r = INJECTIVITY_RADIUS[spec.beta] if radius is None else radius
    return sample_clustered(spec.n, spec.p, spec.N, spec.beta, radius=r, seed=seed)


def run_once(spec, seed, config=None, radius=None):
    """Solve one sampled dataset with A1, A2_lower and A3 and certify ``Y*``."""
    ds = sample_row(spec, seed, radius)
    base = config or SolverConfig(nu=spec.nu)
    base = replace(base, nu=spec.nu)
    res = {a: solve(ds, replace(base, algo=a))
           for a in (Algorithm.A1, Algorithm.A2_LOWER, Algorithm.A3)}
    X, Y, Z = res[Algorithm.A1], res[Algorithm.A2_LOWER], res[Algorithm.A3]
    rep = bounds_report(ds, spec.nu, Y.point, reference=X.point, f_nu=Y.f_nu)
    return RunOutcome(
        seed=seed,
        f_X=X.f_nu, f_Y=Y.f_nu, f_Z=Z.f_nu,
        gap=rep.thm1_lhs, thm1=rep.thm1_rhs,
        dist=rep.dist_ref, thm2=rep.thm2_upper, thm3=rep.thm3_lower,
        converged={a.value: r.converged for a, r in res.items()},
    )


def run_table_row(spec, runs=10, seed=0, config=None, radius=None, progress=None):
    """Run ``runs`` seeded repetitions of a table configuration.

    Returns
    -------
    summary : dict
        Averages keyed by :data:`TABLE_COLUMNS`.
    outcomes : list of RunOutcome
    """
    outcomes: List[RunOutcome] = []
    for k in range(runs):
        out = run_once(spec, run_seed(seed, k), config, radius)
        outcomes.append(out)
        if progress is not None:
            progress(k, out)
    mean = lambda attr: statistics.fmean(getattr(o, attr) for o in outcomes)
    summary = {
        "row": spec.row, "n": spec.n, "p": spec.p, "N": spec.N,
        "beta": spec.beta, "nu": spec.nu, "kind": spec.kind, "runs": runs,
    }
    for col in ("f_X", "f_Y", "f_Z", "gap", "thm1", "dist", "thm2", "thm3"):
        summary[col] = mean(col)
    summary["gap_ok_all_runs"] = all(o.gap_ok for o in outcomes)
    summary["dist_ok_all_runs"] = all(o.dist_ok for o in outcomes)
    return summary, outcomes


# ----------------------------------------------------------------------
# timing


BENCH_ALGOS = (Algorithm.A1, Algorithm.A2_LOWER, Algorithm.A3)


def bench(n=140, p_list=(5, 10, 20), N=5, nu=2.0, beta=0.5, reps=5, skip_a1_above=None,
          seed=0, kind="spread"):
    """Median solver wall time in milliseconds per ``(p, algo)``.

    Runs single-threaded. Only the solver loop is timed; final objective
    evaluations are excluded. A1 is skipped (``None``) for ``p`` above
    ``skip_a1_above``.
    """
    rows = []
    with serial():
        for p in p_list:
            spec = TableRow(0, N, n, p, beta, nu, kind)
            ds = sample_row(spec, run_seed(seed, p))
            for algo in BENCH_ALGOS:
                if algo is Algorithm.A1 and skip_a1_above is not None and p > skip_a1_above:
                    rows.append((p, algo.value, None))
                    continue
                cfg = SolverConfig(algo=algo, nu=nu, compute_exact=False)
                times = [solve(ds, cfg).wall_time_ms for _ in range(reps)]
                rows.append((p, algo.value, statistics.median(times)))
    return rows
