"""One timed benchmark run and its report."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from ..exceptions import NotConverged, SingularPivot
from ..gmresir import RefineConfig, gmres_refine, initial_solution
from ..lufact import FactorConfig, lu_nopivot_mixed
from ..matgen import GenSpec, generate_matrix, generate_rhs
from ..metrics import BERR_THRESHOLD, MAX_ITERATIONS, backward_error, figure_of_merit
from .scaling import equilibrate, scale_rhs, unscale_solution


def report_is_valid(berr, iterations, debug_only, max_iters=MAX_ITERATIONS) -> bool:
    """Official validity: berr < 16, within the iteration cap, not a debug matrix."""
    cap = min(max_iters, MAX_ITERATIONS)
    return bool(berr < BERR_THRESHOLD and iterations <= cap and not debug_only)


@dataclass
class BenchReport:
    spec: GenSpec
    factor_cfg: FactorConfig = field(default_factory=FactorConfig)
    refine_cfg: RefineConfig = field(default_factory=RefineConfig)
    equilibrate: bool = False
    t_scale: float = 0.0
    t_factor: float = 0.0
    t_refine: float = 0.0
    t_total: float = 0.0
    iterations: int = 0
    berr: float = math.nan
    fom_ops_per_sec: float = 0.0
    valid: bool = False
    debug_only: bool = False

    @property
    def breakdown(self) -> bool:
        """The factorization failed, so no solution (and no berr) exists."""
        return math.isnan(self.berr)


def run_benchmark(spec: GenSpec, fcfg: FactorConfig = None, rcfg: RefineConfig = None,
                  use_equilibration: bool = False) -> BenchReport:
    """Generate, (optionally) equilibrate, factor, refine and validate.

    Generation and validation are not timed.  A run that needs more than
    ``rcfg.max_iters`` iterations is reported with ``iterations =
    max_iters + 1``; a factorization breakdown leaves ``berr`` as NaN.
    Both are invalid reports, never exceptions.
    """
    fcfg = fcfg or FactorConfig()
    rcfg = rcfg or RefineConfig()
    rep = BenchReport(spec, fcfg, rcfg, use_equilibration, debug_only=spec.debug_only)

    A = generate_matrix(spec)
    b = generate_rhs(spec)

    t0 = time.perf_counter()
    if use_equilibration:
        As, r, c = equilibrate(A)
        bs = scale_rhs(b, r)
    else:
        As, bs, c = A, b, None
    t1 = time.perf_counter()
    try:
        f, _ = lu_nopivot_mixed(As, fcfg)
    except SingularPivot:
        t2 = time.perf_counter()
        _finish_times(rep, t0, t1, t2, t2)
        rep.fom_ops_per_sec = 0.0
        return rep
    t2 = time.perf_counter()
    converged = True
    try:
        x0 = initial_solution(f, bs, rcfg)
        res = gmres_refine(As, f, bs, x0, rcfg)
    except NotConverged as exc:
        res = exc.result
        converged = False
    x = unscale_solution(res.x, c) if c is not None else res.x
    t3 = time.perf_counter()
    _finish_times(rep, t0, t1, t2, t3)

    rep.iterations = res.iterations if converged else rcfg.max_iters + 1
    rep.berr = backward_error(A, x, b)
    rep.valid = report_is_valid(rep.berr, rep.iterations, rep.debug_only, rcfg.max_iters)
    return rep


def _finish_times(rep, t0, t1, t2, t3):
    rep.t_scale = t1 - t0
    rep.t_factor = t2 - t1
    rep.t_refine = t3 - t2
    rep.t_total = rep.t_scale + rep.t_factor + rep.t_refine
    rep.fom_ops_per_sec = figure_of_merit(rep.spec.n, rep.t_total) if rep.t_total > 0 else 0.0
