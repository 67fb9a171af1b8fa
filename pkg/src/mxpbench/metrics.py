"""Benchmark acceptance arithmetic: scaled backward error, the validity
threshold and the reported operation rate."""
from __future__ import annotations

import numpy as np

from .densela import mat_norm_inf, matvec, vec_norm
from .exceptions import DegenerateSystem, DimensionMismatch

EPS64 = 2.0**-53
BERR_THRESHOLD = 16.0
MAX_ITERATIONS = 50


def scaled_residual(r_inf, a_inf, x_inf, b_inf, n) -> float:
    """``r_inf / (a_inf * x_inf + b_inf) / (n * eps)`` with eps = 2**-53."""
    denom = a_inf * x_inf + b_inf
    if denom == 0:
        raise DegenerateSystem("||A|| ||x|| + ||b|| is zero")
    return r_inf / denom / (n * EPS64)


def residual(A, x, b):
    """``b - A x`` in float64 with the fixed column order of :func:`matvec`."""
    return np.asarray(b, dtype=np.float64) - matvec(A, x)


def backward_error(A, x, b, anorm=None) -> float:
    A = np.asarray(A, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = A.shape[0]
    if b.shape != (n,) or x.shape != (A.shape[1],):
        raise DimensionMismatch("A, x and b do not conform")
    if anorm is None:
        anorm = mat_norm_inf(A)
    r = residual(A, x, b)
    return scaled_residual(vec_norm(r, "inf"), anorm, vec_norm(x, "inf"), vec_norm(b, "inf"), n)


def validate(berr) -> bool:
    """A run passes only when its backward error is strictly below 16."""
    return bool(berr < BERR_THRESHOLD)


def canonical_ops(n) -> float:
    n = float(n)
    return 2.0 / 3.0 * n**3 + 3.0 / 2.0 * n**2


def figure_of_merit(n, t_total) -> float:
    """Canonical operations ``2/3 n^3 + 3/2 n^2`` per second of total time."""
    if not t_total > 0:
        raise ValueError("t_total must be positive")
    return canonical_ops(n) / t_total
