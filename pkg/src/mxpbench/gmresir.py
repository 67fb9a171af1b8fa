"""GMRES-based iterative refinement preconditioned by low-precision LU.

Krylov arithmetic is float64; only the preconditioner solves run in the
(usually lower) ``precond_fmt``.  Convergence is judged on the true float64
residual after every Arnoldi step.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .densela import mat_norm_inf, matvec
from .exceptions import DimensionMismatch, NotConverged, NumericalBreakdown
from .lufact import LUFactors, lu_solve
from .metrics import BERR_THRESHOLD, MAX_ITERATIONS, backward_error
from .precision import BINARY32, BINARY64, Format, get_format

REORTH = ("never", "heuristic")
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class RefineConfig:
    max_iters: int = MAX_ITERATIONS
    berr_target: float = 1.0
    precond_fmt: Format = BINARY64
    reorthogonalize: str = "heuristic"
    happy_breakdown_tol: float = 1e-14

    def __post_init__(self):
        object.__setattr__(self, "precond_fmt", get_format(self.precond_fmt))
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.berr_target < BERR_THRESHOLD:
            raise ValueError(f"berr_target must lie in (0, {BERR_THRESHOLD})")
        if self.reorthogonalize not in REORTH:
            raise ValueError(f"reorthogonalize must be one of {REORTH}")

    @property
    def official(self) -> bool:
        return self.max_iters <= MAX_ITERATIONS


@dataclass
class RefineResult:
    x: np.ndarray
    iterations: int
    berr_history: List[float]
    converged: bool
    t_refine: float = 0.0
    berr_initial: float = math.nan
    # Givens estimates of ||M^-1 (b - A x_k)||_2, index 0 is the start vector
    precond_residuals: List[float] = field(default_factory=list)
    orthogonality_loss: float = 0.0
    happy_breakdown: bool = False

    @property
    def berr(self) -> float:
        return self.berr_history[-1] if self.berr_history else self.berr_initial


def apply_preconditioner(f: LUFactors, v, fmt=BINARY32):
    """``U^-1 L^-1 P v`` with every operation rounded to ``fmt``."""
    return lu_solve(f, v, fmt)


def initial_solution(f: LUFactors, b, cfg: RefineConfig = RefineConfig()):
    """First solve with the low-precision factors (the refinement's start)."""
    return lu_solve(f, b, cfg.precond_fmt)


def _rotation(a, b):
    if b == 0.0:
        return 1.0, 0.0
    h = math.hypot(a, b)
    return a / h, b / h


def gmres_refine(A, f: LUFactors, b, x0, cfg: RefineConfig = RefineConfig()) -> RefineResult:
    """Refine ``x0`` with left-preconditioned, unrestarted GMRES.

    Raises :class:`NotConverged` (carrying the partial result) when the
    backward error is still at or above ``cfg.berr_target`` after
    ``cfg.max_iters`` Arnoldi steps or at a happy breakdown.
    """
    t0 = time.perf_counter()
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,) or x0.shape != (n,):
        raise DimensionMismatch("A, b and x0 do not conform")
    if not np.all(np.isfinite(x0)):
        raise NumericalBreakdown("initial guess is not finite")
    fmt = cfg.precond_fmt
    anorm = mat_norm_inf(A)

    berr0 = backward_error(A, x0, b, anorm)
    res = RefineResult(x0.copy(), 0, [], berr0 < cfg.berr_target, berr_initial=berr0)
    if res.converged:
        res.t_refine = time.perf_counter() - t0
        return res

    z = apply_preconditioner(f, b - matvec(A, x0), fmt)
    beta = float(np.linalg.norm(z))
    if not math.isfinite(beta):
        raise NumericalBreakdown("preconditioned residual is not finite")
    res.precond_residuals.append(beta)
    if beta == 0.0:
        res.t_refine = time.perf_counter() - t0
        raise NotConverged(res, "preconditioned residual vanished but the backward error did not")

    m = cfg.max_iters
    V = np.zeros((n, m + 1), order="F")
    H = np.zeros((m + 1, m), order="F")
    cs = np.zeros(m)
    sn = np.zeros(m)
    g = np.zeros(m + 1)
    g[0] = beta
    V[:, 0] = z / beta

    k_done = 0
    for k in range(m):
        w = apply_preconditioner(f, matvec(A, V[:, k]), fmt)
        if not np.all(np.isfinite(w)):
            raise NumericalBreakdown(f"non-finite Krylov vector at step {k + 1}")
        norm_before = float(np.linalg.norm(w))
        for i in range(k + 1):
            H[i, k] = V[:, i] @ w
            w -= H[i, k] * V[:, i]
        h_next = float(np.linalg.norm(w))
        if cfg.reorthogonalize == "heuristic" and h_next < _INV_SQRT2 * norm_before:
            for i in range(k + 1):
                c = V[:, i] @ w
                H[i, k] += c
                w -= c * V[:, i]
            h_next = float(np.linalg.norm(w))
        H[k + 1, k] = h_next

        for i in range(k):
            hi, hj = H[i, k], H[i + 1, k]
            H[i, k] = cs[i] * hi + sn[i] * hj
            H[i + 1, k] = -sn[i] * hi + cs[i] * hj
        cs[k], sn[k] = _rotation(H[k, k], H[k + 1, k])
        H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]
        res.precond_residuals.append(abs(g[k + 1]))

        y = _back_substitute(H[: k + 1, : k + 1], g[: k + 1])
        x = x0 + V[:, : k + 1] @ y
        if not np.all(np.isfinite(x)):
            raise NumericalBreakdown(f"non-finite iterate at step {k + 1}")
        berr = backward_error(A, x, b, anorm)
        res.x = x
        res.iterations = k + 1
        res.berr_history.append(berr)
        k_done = k + 1
        if berr < cfg.berr_target:
            res.converged = True
            break
        if h_next < cfg.happy_breakdown_tol * beta:
            res.happy_breakdown = True
            break
        V[:, k + 1] = w / h_next

    Vk = V[:, :k_done]
    res.orthogonality_loss = float(np.max(np.abs(Vk.T @ Vk - np.eye(k_done)))) if k_done else 0.0
    res.t_refine = time.perf_counter() - t0
    if not res.converged:
        raise NotConverged(res)
    return res


def _back_substitute(R, g):
    k = R.shape[0]
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - R[i, i + 1 :] @ y[i + 1 :]) / R[i, i]
    return y
