"""Pivot-growth and residual-norm sweeps over random unscaled matrices.

Each (n, seed) cell is independent; cells may run in worker processes and
rows always come back sorted by (n, seed).  BLAS is pinned to one thread
inside a cell so a cell's numbers never depend on the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from ..densela import matvec_accumulate, vec_norm
from ..exceptions import SingularPivot
from ..lufact import lu_fp64, lu_solve
from ..matgen import N_MAX, GenSpec, generate_matrix, generate_rhs, iter_column_blocks
from ..metrics import residual, scaled_residual

STATUS_OK = "ok"
STATUS_SINGULAR = "singular_pivot"


@dataclass
class ExperimentRow:
    n: int
    seed: int
    scheme: str = "none"
    pivoting: str = "partial"
    max_pivot: float = math.nan
    max_pivot_col: int = -1
    norm1: float = math.nan
    norm2: float = math.nan
    norminf: float = math.nan
    status: str = STATUS_OK

    @property
    def sqrt_n(self) -> float:
        return math.sqrt(self.n)

    @property
    def c58_sqrt_n(self) -> float:
        return 0.625 * math.sqrt(self.n)

    @property
    def n_045(self) -> float:
        return self.n**0.45


def _spec(n, seed):
    return GenSpec(n, seed, "uniform", "none")


def pivot_cell(n, seed) -> ExperimentRow:
    with threadpool_limits(limits=1):
        A = generate_matrix(_spec(n, seed))
        _, stats = lu_fp64(A, "partial", overwrite=True)
    return ExperimentRow(n, seed, max_pivot=stats.max_pivot, max_pivot_col=stats.max_pivot_col)


def norm_cell(n, seed, pivoting) -> ExperimentRow:
    spec = _spec(n, seed)
    row = ExperimentRow(n, seed, pivoting=pivoting)
    with threadpool_limits(limits=1):
        A = generate_matrix(spec)
        b = generate_rhs(spec)
        try:
            f, stats = lu_fp64(A, pivoting)
        except SingularPivot:
            row.status = STATUS_SINGULAR
            return row
        x = lu_solve(f, b, "fp64")
        r = -residual(A, x, b)
    row.max_pivot, row.max_pivot_col = stats.max_pivot, stats.max_pivot_col
    row.norm1, row.norm2, row.norminf = (vec_norm(r, w) for w in ("one", "two", "inf"))
    return row


def streamed_backward_error(spec: GenSpec, x, b) -> float:
    """Backward error of ``x`` against the matrix of ``spec`` without holding it.

    Column blocks are regenerated on the fly; the residual accumulates in the
    same column order as :func:`~mxpbench.densela.matvec`.
    """
    r = np.zeros(spec.n)
    rowsum = np.zeros(spec.n)
    for j0, j1, block in iter_column_blocks(spec):
        matvec_accumulate(r, block, x[j0:j1])
        rowsum += np.sum(np.abs(block), axis=1)
    r = np.asarray(b) - r
    return scaled_residual(vec_norm(r, "inf"), float(np.max(rowsum)), vec_norm(x, "inf"),
                           vec_norm(b, "inf"), spec.n)


def fitness_cell(n, seed, distribution="uniform"):
    """float64 no-pivot LU + direct solve on a sqrt(n)-shifted system.

    Returns ``(berr, status)``; the matrix is factored in place and
    regenerated for the residual, so peak memory is one n x n array.
    """
    spec = GenSpec(n, seed, distribution, "sqrt_n")
    with threadpool_limits(limits=1):
        A = generate_matrix(spec)
        try:
            f, _ = lu_fp64(A, "none", overwrite=True)
        except SingularPivot:
            return math.nan, STATUS_SINGULAR
        b = generate_rhs(spec)
        x = lu_solve(f, b, "fp64")
        del f, A
        return streamed_backward_error(spec, x, b), STATUS_OK


def _cells(sizes, seeds_per_size, base_seed):
    for n in sizes:
        if not 1 <= n <= N_MAX:
            raise ValueError(f"size {n} outside [1, {N_MAX}]")
    return sorted((n, base_seed + s) for n in sizes for s in range(seeds_per_size))


def _run(fn, cells, threads):
    if threads <= 1:
        return [fn(*c) for c in cells]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, *zip(*cells)))


def experiment_pivot_sweep(sizes, seeds_per_size, base_seed=0, threads=1):
    """Largest partial-pivoting pivot and its column for each (n, seed)."""
    return _run(pivot_cell, _cells(sizes, seeds_per_size, base_seed), threads)


def experiment_norm_sweep(sizes, seeds_per_size, pivoting="partial", base_seed=0, threads=1):
    """Norms of ``A x - b`` after a float64 LU solve with or without pivoting."""
    cells = [(n, s, pivoting) for n, s in _cells(sizes, seeds_per_size, base_seed)]
    return _run(norm_cell, cells, threads)


def geometric_mean(values) -> float:
    v = np.asarray(values, dtype=np.float64)
    return float(np.exp(np.mean(np.log(v))))
