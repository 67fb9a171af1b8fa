"""CSV schemas for benchmark reports and sweep rows.

Floats are written with ``repr`` (shortest round-trip decimal), booleans as
``true``/``false``, so parsing a file reproduces every field exactly.
"""
from __future__ import annotations

import csv
import io

from ..gmresir import RefineConfig
from ..lufact import FactorConfig
from ..matgen import GenSpec
from ..precision import get_format, short_name
from .bench import BenchReport
from .experiments import ExperimentRow

BENCH_COLUMNS = ("n", "seed", "dist", "scale", "theta", "low", "panel", "accum", "nb",
                 "equilibrate", "t_scale", "t_factor", "t_refine", "t_total", "iters", "berr",
                 "fom", "valid", "debug_only")
PIVOT_COLUMNS = ("n", "seed", "max_pivot", "max_pivot_col", "sqrt_n", "c58_sqrt_n", "n_045")
NORM_COLUMNS = ("n", "seed", "pivoting", "norm1", "norm2", "norminf", "status")

DIST_NAMES = {"uniform": "uniform", "gaussian": "gauss"}
SCALE_NAMES = {"none": "none", "sqrt_n": "sqrtn", "linear_n": "n", "ddd": "ddd"}
DIST_FROM_CLI = {v: k for k, v in DIST_NAMES.items()}
SCALE_FROM_CLI = {v: k for k, v in SCALE_NAMES.items()}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _bool(s: str) -> bool:
    if s not in ("true", "false"):
        raise ValueError(f"expected true/false, got {s!r}")
    return s == "true"


def bench_record(rep: BenchReport) -> dict:
    s, fc = rep.spec, rep.factor_cfg
    return {
        "n": s.n, "seed": s.seed, "dist": DIST_NAMES[s.distribution],
        "scale": SCALE_NAMES[s.diag_scaling], "theta": s.theta,
        "low": short_name(fc.low_fmt), "panel": short_name(fc.panel_fmt),
        "accum": short_name(fc.accum_fmt), "nb": fc.block_size,
        "equilibrate": rep.equilibrate, "t_scale": rep.t_scale, "t_factor": rep.t_factor,
        "t_refine": rep.t_refine, "t_total": rep.t_total, "iters": rep.iterations,
        "berr": rep.berr, "fom": rep.fom_ops_per_sec, "valid": rep.valid,
        "debug_only": rep.debug_only,
    }


def bench_from_record(rec: dict, refine_cfg: RefineConfig = None) -> BenchReport:
    """Inverse of :func:`bench_record`; the refine config is not in the CSV."""
    spec = GenSpec(int(rec["n"]), int(rec["seed"]), DIST_FROM_CLI[rec["dist"]],
                   SCALE_FROM_CLI[rec["scale"]], float(rec["theta"]) if rec["theta"] else None)
    fcfg = FactorConfig(panel_fmt=get_format(rec["panel"]), low_fmt=get_format(rec["low"]),
                        accum_fmt=get_format(rec["accum"]), block_size=int(rec["nb"]))
    return BenchReport(
        spec, fcfg, refine_cfg or RefineConfig(), _bool(rec["equilibrate"]),
        float(rec["t_scale"]), float(rec["t_factor"]), float(rec["t_refine"]),
        float(rec["t_total"]), int(rec["iters"]), float(rec["berr"]), float(rec["fom"]),
        _bool(rec["valid"]), _bool(rec["debug_only"]),
    )


def pivot_record(row: ExperimentRow) -> dict:
    return {"n": row.n, "seed": row.seed, "max_pivot": row.max_pivot,
            "max_pivot_col": row.max_pivot_col, "sqrt_n": row.sqrt_n,
            "c58_sqrt_n": row.c58_sqrt_n, "n_045": row.n_045}


def norm_record(row: ExperimentRow) -> dict:
    return {"n": row.n, "seed": row.seed, "pivoting": row.pivoting, "norm1": row.norm1,
            "norm2": row.norm2, "norminf": row.norminf, "status": row.status}


def pivot_from_record(rec: dict) -> ExperimentRow:
    return ExperimentRow(int(rec["n"]), int(rec["seed"]), max_pivot=float(rec["max_pivot"]),
                         max_pivot_col=int(rec["max_pivot_col"]))


def norm_from_record(rec: dict) -> ExperimentRow:
    return ExperimentRow(int(rec["n"]), int(rec["seed"]), pivoting=rec["pivoting"],
                         norm1=float(rec["norm1"]), norm2=float(rec["norm2"]),
                         norminf=float(rec["norminf"]), status=rec["status"])


def dumps(columns, records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec[c]) for c in columns])
    return buf.getvalue()


def loads(text: str, columns=None) -> list:
    rows = list(csv.DictReader(io.StringIO(text)))
    if columns is not None and rows and tuple(rows[0].keys()) != tuple(columns):
        raise ValueError(f"unexpected header {list(rows[0].keys())}")
    return rows


def bench_csv(reports) -> str:
    return dumps(BENCH_COLUMNS, [bench_record(r) for r in reports])


def pivot_csv(rows) -> str:
    return dumps(PIVOT_COLUMNS, [pivot_record(r) for r in rows])


def norm_csv(rows) -> str:
    return dumps(NORM_COLUMNS, [norm_record(r) for r in rows])
