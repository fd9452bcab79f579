"""JSON dataset/result files and CSV traces.

Floats are written with Python's shortest round-trip ``repr`` so loading
and re-saving a file reproduces it byte for byte.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError
from .sampling import Dataset

DATASET_SCHEMA = "stiefel-dataset/1"
RESULT_SCHEMA = "stiefel-result/1"
TRACE_HEADER = ("iter", "f_nu", "objective_internal", "update_norm", "time_ms")


def _dumps(obj):
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _matrix(X):
    return [[float(v) for v in row] for row in np.asarray(X)]


def dataset_to_dict(ds):
    return {
        "schema": DATASET_SCHEMA,
        "n": ds.n,
        "p": ds.p,
        "N": ds.N,
        "beta": float(ds.beta),
        "kind": ds.kind,
        "seed": int(ds.seed),
        "cluster_radius": None if ds.cluster_radius is None else float(ds.cluster_radius),
        "points": [_matrix(X) for X in ds.points],
    }


def dataset_from_dict(d):
    if d.get("schema") != DATASET_SCHEMA:
        raise InvalidArgumentError(f"not a {DATASET_SCHEMA} document")
    points = np.array(d["points"], dtype=np.float64)
    if points.shape[0] != d["N"]:
        raise InvalidArgumentError(f"N={d['N']} but {points.shape[0]} points stored")
    return Dataset(
        n=int(d["n"]),
        p=int(d["p"]),
        beta=float(d["beta"]),
        points=points.reshape(int(d["N"]), int(d["n"]), int(d["p"])),
        kind=d["kind"],
        seed=int(d["seed"]),
        cluster_radius=d.get("cluster_radius"),
    )


def save_dataset(ds, path):
    Path(path).write_text(_dumps(dataset_to_dict(ds)))


def load_dataset(path):
    return dataset_from_dict(json.loads(Path(path).read_text()))


def result_to_dict(result, ds, certificates=None, trace_path=None):
    cfg = result.config
    return {
        "schema": RESULT_SCHEMA,
        "algo": cfg.algo.value,
        "nu": cfg.nu,
        "beta": float(ds.beta),
        "n": ds.n,
        "p": ds.p,
        "converged": result.converged,
        "status": result.status,
        "iterations": result.iterations,
        "wall_time_ms": result.wall_time_ms,
        "init_fallback": result.init_fallback,
        "objectives": {"f_nu": result.f_nu, "f_hat": result.f_hat, "F_hat": result.F_hat},
        "certificates": certificates or {},
        "point": _matrix(result.point),
        "trace_path": None if trace_path is None else str(trace_path),
    }


def save_result(doc, path):
    Path(path).write_text(_dumps(doc))


def load_result(path):
    """Load a result document; ``point`` is returned as an ndarray."""
    d = json.loads(Path(path).read_text())
    if d.get("schema") != RESULT_SCHEMA:
        raise InvalidArgumentError(f"not a {RESULT_SCHEMA} document")
    d["point"] = np.array(d["point"], dtype=np.float64)
    from .stiefel import Stiefel

    Stiefel(d["n"], d["p"], d["beta"]).check_point(d["point"])
    return d


def write_trace(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_HEADER)
        for rec in trace:
            w.writerow([
                rec.iter,
                "" if rec.f_nu is None else repr(float(rec.f_nu)),
                repr(float(rec.objective_internal)),
                repr(float(rec.update_norm)),
                f"{rec.time_ms:.3f}",
            ])


def read_trace(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
