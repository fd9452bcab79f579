"""Command-line front end: ``stiefel-barycenter {sample,solve,report,table,bench}``.

Exit codes: 0 success, 2 usage error or mismatched files, 3 I/O failure,
4 solver stopped without converging, 5 logarithm divergence (data index
on stderr), 6 certificate bracket violated.
"""

import argparse
import csv
import json
import logging
import sys

from . import io as sio
from .certificates import bounds_report
from .errors import DegenerateCertificateError, LogDivergenceError, StiefelError
from .experiments import INJECTIVITY_RADIUS, TABLE_COLUMNS, TABLE_ROWS, bench, run_table_row
from .sampling import DEFAULT_CLUSTER_RADIUS, sample_clustered, sample_uniform
from .solvers import Algorithm, SolverConfig, solve

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_MAX_ITER = 4
EXIT_LOG_DIVERGENCE = 5
EXIT_VIOLATION = 6

ALGOS = {"a1": Algorithm.A1, "a2": Algorithm.A2_LOWER, "a2-upper": Algorithm.A2_UPPER,
         "a3": Algorithm.A3}
SLOW_ROWS = (3, 4)

log = logging.getLogger("stiefel_barycenter")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_dataset(path):
    try:
        return sio.load_dataset(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read dataset {path}: {exc}", EXIT_IO)


def _write(fn, *args):
    try:
        fn(*args)
    except OSError as exc:
        raise CliError(f"cannot write {args[-1]}: {exc}", EXIT_IO)


def _parse_init(text):
    if text == "polar":
        return "polar_mean"
    if text.startswith("point:"):
        try:
            return int(text.split(":", 1)[1])
        except ValueError:
            pass
    raise argparse.ArgumentTypeError(f"expected 'polar' or 'point:k', got {text!r}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _p_list(text):
    try:
        return [_positive_int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


# ----------------------------------------------------------------------
# subcommands


def cmd_sample(args):
    if args.kind == "spread":
        ds = sample_uniform(args.n, args.p, args.N, args.seed, beta=args.beta)
    else:
        radius = DEFAULT_CLUSTER_RADIUS if args.radius is None else args.radius
        ds = sample_clustered(args.n, args.p, args.N, args.beta, radius=radius, seed=args.seed)
    _write(sio.save_dataset, ds, args.out)
    return 0


def cmd_solve(args):
    ds = _load_dataset(args.data)
    cfg = SolverConfig(
        algo=ALGOS[args.algo],
        nu=args.nu,
        epsilon=args.eps,
        max_iter=args.max_iter,
        a3_normalized=not args.a3_literal,
        init=args.init,
        exact_trace=args.exact_trace,
    )
    try:
        res = solve(ds, cfg)
    except LogDivergenceError as exc:
        print(f"log-divergence at data index {exc.index}: {exc}", file=sys.stderr)
        return EXIT_LOG_DIVERGENCE
    certs = {}
    if res.f_hat is not None and res.f_hat > 0:
        rep = bounds_report(ds, cfg.nu, res.point)
        certs = {"thm1_rhs": rep.thm1_rhs, "thm2_upper": rep.thm2_upper}
    if args.trace:
        _write(sio.write_trace, res.trace, args.trace)
    doc = sio.result_to_dict(res, ds, certs, args.trace)
    _write(sio.save_result, doc, args.out)
    if not res.converged:
        print(f"solver stopped without converging ({res.status}) after {res.iterations} "
              "iterations", file=sys.stderr)
        return EXIT_MAX_ITER
    return 0


def _load_result(path):
    try:
        return sio.load_result(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read result {path}: {exc}", EXIT_IO)


def _check_match(ds, doc, path):
    if (doc["n"], doc["p"], float(doc["beta"])) != (ds.n, ds.p, float(ds.beta)):
        raise CliError(f"{path}: (n, p, beta) = ({doc['n']}, {doc['p']}, {doc['beta']}) "
                       f"does not match the dataset ({ds.n}, {ds.p}, {ds.beta})", EXIT_USAGE)


def cmd_report(args):
    ds = _load_dataset(args.data)
    res = _load_result(args.result)
    _check_match(ds, res, args.result)
    ref = None
    if args.reference:
        ref_doc = _load_result(args.reference)
        _check_match(ds, ref_doc, args.reference)
        if float(ref_doc["nu"]) != float(res["nu"]):
            raise CliError("result and reference were solved with different nu", EXIT_USAGE)
        ref = ref_doc["point"]
    nu = res["nu"]
    try:
        rep = bounds_report(ds, nu, res["point"], reference=ref)
    except LogDivergenceError as exc:
        print(f"log-divergence at data index {exc.index}: {exc}", file=sys.stderr)
        return EXIT_LOG_DIVERGENCE
    except DegenerateCertificateError as exc:
        print(json.dumps({"nu": nu, "N": ds.N, "degenerate": str(exc)}, indent=1))
        return 0
    json.dump(rep.to_dict(), sys.stdout, indent=1)
    print()
    if rep.violations:
        for v in rep.violations:
            print(f"violation: {v}", file=sys.stderr)
        return EXIT_VIOLATION
    return 0


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_table(args):
    spec = TABLE_ROWS[args.row]
    scale = args.scale
    if args.row in SLOW_ROWS and scale == 1 and not args.allow_slow:
        scale = 2
        print(f"row {args.row}: A1 at full size is slow; running at --scale 2 "
              "(pass --allow-slow for full size)", file=sys.stderr)
    try:
        spec = spec.scaled(scale)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    if args.row not in SLOW_ROWS and scale == 1:
        print(f"row {args.row}: runs A1 with exact logarithms; expect minutes", file=sys.stderr)

    def progress(k, out):
        if args.per_run:
            print(f"run {k}: seed={out.seed} f_X={out.f_X:.6g} f_Y={out.f_Y:.6g} "
                  f"f_Z={out.f_Z:.6g} gap={out.gap:.3e}<=thm1={out.thm1:.4g} "
                  f"dist={out.dist:.4g}<=thm2={out.thm2:.4g}", file=sys.stderr)

    radius = args.radius
    if radius is None and spec.kind == "clustered":
        radius = INJECTIVITY_RADIUS[spec.beta]
    try:
        summary, outcomes = run_table_row(spec, runs=args.runs, seed=args.seed, radius=radius,
                                          progress=progress)
    except LogDivergenceError as exc:
        print(f"log-divergence at data index {exc.index}: {exc}", file=sys.stderr)
        return EXIT_LOG_DIVERGENCE
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    w.writerow([_fmt(summary[c]) for c in TABLE_COLUMNS])
    if spec.reference is not None:
        dev = [(summary[c] - r) / r for c, r in zip(("f_X", "f_Y", "f_Z"), spec.reference)]
        print("relative deviation from published means: "
              + " ".join(f"{d:+.1%}" for d in dev), file=sys.stderr)
    ok = summary["gap_ok_all_runs"] and summary["dist_ok_all_runs"]
    return 0 if ok else EXIT_VIOLATION


def cmd_bench(args):
    rows = bench(n=args.n, p_list=args.p_list, N=args.N, nu=args.nu, beta=args.beta,
                 reps=args.reps, skip_a1_above=args.skip_a1_above, seed=args.seed)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("p", "algo", "median_ms"))
    for p, algo, ms in rows:
        w.writerow((p, algo, "skipped" if ms is None else f"{ms:.3f}"))
    return 0


# ----------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="stiefel-barycenter",
        description="Riemannian l^nu barycenters on the Stiefel manifold.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a seeded dataset")
    p.add_argument("--kind", choices=("spread", "clustered"), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--N", type=_positive_int, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=None,
                   help=f"cluster diameter in geodesic distance (default {DEFAULT_CLUSTER_RADIUS})")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("solve", help="compute a barycenter")
    p.add_argument("--algo", choices=tuple(ALGOS), required=True)
    p.add_argument("--nu", type=float, default=2.0)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iter", type=_positive_int, default=1000)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None, help="write the iteration trace as CSV")
    p.add_argument("--exact-trace", action="store_true",
                   help="evaluate the exact objective at every iterate of a2/a3")
    p.add_argument("--a3-literal", action="store_true",
                   help="use the unnormalized fixed-point weights")
    p.add_argument("--init", type=_parse_init, default="polar", help="polar | point:k")
    p.add_argument("--seed", type=int, default=0,
                   help="accepted for uniformity; the solvers are deterministic")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("report", help="certificates for a solver result")
    p.add_argument("--data", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--reference", default=None, help="result file holding x* (an a1 run)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("table", help="averaged comparison of a1, a2 and a3")
    p.add_argument("--row", type=int, choices=sorted(TABLE_ROWS), required=True)
    p.add_argument("--runs", type=_positive_int, default=10)
    p.add_argument("--scale", type=_positive_int, default=1, help="divide n and p by this")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=None,
                   help="cluster diameter (default: injectivity radius for the row's beta)")
    p.add_argument("--allow-slow", action="store_true", help="run rows 3-4 at full size")
    p.add_argument("--per-run", action="store_true", help="print every run to stderr")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("bench", help="median solver wall time per p")
    p.add_argument("--n", type=_positive_int, default=140)
    p.add_argument("--p-list", type=_p_list, default=[5, 10, 20])
    p.add_argument("--N", type=_positive_int, default=5)
    p.add_argument("--nu", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--skip-a1-above", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (StiefelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
