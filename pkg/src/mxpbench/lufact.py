"""LU factorization: the emulated mixed-precision no-pivot benchmark kernel
and a float64 reference with optional partial pivoting.

Factors are stored packed: the strict lower triangle holds unit-lower L and
the upper triangle holds U.  ``perm`` (when present) satisfies
``A[perm] == L @ U`` up to rounding.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .densela import Arith, gemm_mixed, mat_norm_inf, substitute
from .exceptions import DimensionMismatch, SingularPivot
from .precision import BINARY16, BINARY32, BINARY64, Format, get_format, round_to, wider

PIVOTING = ("none", "partial")
_REC_BASE = 8
_GEMM_TEMP_ELEMS = 1 << 22


@dataclass(frozen=True)
class FactorConfig:
    pivoting: str = "none"
    panel_fmt: Format = BINARY32
    low_fmt: Format = BINARY16
    accum_fmt: Format = BINARY32
    block_size: int = 128
    pivot_floor: float = 2.0**-40

    def __post_init__(self):
        for name in ("panel_fmt", "low_fmt", "accum_fmt"):
            object.__setattr__(self, name, get_format(getattr(self, name)))
        if self.pivoting not in PIVOTING:
            raise ValueError(f"pivoting must be one of {PIVOTING}")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.low_fmt.precision_bits > self.accum_fmt.precision_bits:
            raise ValueError("low_fmt must not be wider than accum_fmt")

    @property
    def storage_fmt(self) -> Format:
        """Format the working matrix (and the packed factors) is held in."""
        return wider(self.panel_fmt, self.accum_fmt)


FP64_CONFIG = FactorConfig(panel_fmt=BINARY64, low_fmt=BINARY64, accum_fmt=BINARY64)


@dataclass
class PivotStats:
    max_pivot: float
    max_pivot_col: int
    per_col_pivots: Optional[np.ndarray] = None

    @classmethod
    def from_pivots(cls, pivots):
        pivots = np.asarray(pivots, dtype=np.float64)
        k = int(np.argmax(pivots))
        return cls(float(pivots[k]), k, pivots)


@dataclass
class LUFactors:
    packed: np.ndarray
    perm: Optional[np.ndarray] = None
    panel_fmt: Format = BINARY64
    low_fmt: Format = BINARY64
    accum_fmt: Format = BINARY64
    block_size: int = 0
    # packed factors re-rounded per solve format, filled lazily by lu_solve
    _loaded: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.packed.shape[0]

    @property
    def L(self) -> np.ndarray:
        return np.tril(self.packed, -1) + np.eye(self.n)

    @property
    def U(self) -> np.ndarray:
        return np.triu(self.packed)


def _check_square(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def _check_pivot(value, col, floor):
    if not np.isfinite(value) or abs(value) < floor or value == 0:
        raise SingularPivot(col, float(value))


def _factor_panel(P, ar: Arith, pivots, col0, floor):
    """Left-looking elimination of a tall panel, in place, no pivoting."""
    w = P.shape[1]
    for j in range(w):
        col = P[:, j]
        for k in range(j):
            col[k + 1 :] = ar.sub(col[k + 1 :], ar.mul(P[k + 1 :, k], col[k]))
        d = col[j]
        _check_pivot(d, col0 + j, floor)
        pivots[j] = abs(d)
        col[j + 1 :] = ar.div(col[j + 1 :], d)


def lu_nopivot_mixed(A, cfg: Optional[FactorConfig] = None):
    """Blocked right-looking LU without pivoting in emulated precisions.

    Per block column: the panel is eliminated with arithmetic in
    ``cfg.panel_fmt``, the block row is solved against the unit-lower
    diagonal block in the same format, and the trailing matrix receives
    ``A22 - L21 @ U12`` from :func:`gemm_mixed` with ``cfg.low_fmt`` operands
    and ``cfg.accum_fmt`` accumulation.  Returns ``(LUFactors, PivotStats)``
    where the pivots are the magnitudes ``|U_ii|``.
    """
    cfg = cfg or FactorConfig()
    if cfg.pivoting != "none":
        raise ValueError("lu_nopivot_mixed requires pivoting='none'")
    A = _check_square(A)
    n = A.shape[0]
    store = cfg.storage_fmt
    pan = Arith(cfg.panel_fmt)
    W = np.asfortranarray(round_to(A, store))
    pivots = np.empty(n)
    nb = cfg.block_size
    for k0 in range(0, n, nb):
        k1 = min(n, k0 + nb)
        P = pan.load(W[k0:, k0:k1])
        _factor_panel(P, pan, pivots[k0:k1], k0, cfg.pivot_floor)
        W[k0:, k0:k1] = round_to(P.astype(np.float64), store)
        if k1 == n:
            break
        U12 = substitute(P[: k1 - k0], pan.load(W[k0:k1, k1:]), pan, lower=True, unit=True)
        W[k0:k1, k1:] = round_to(U12.astype(np.float64), store)
        W[k1:, k1:] = gemm_mixed(
            W[k1:, k1:], W[k1:, k0:k1], W[k0:k1, k1:], alpha=-1.0, beta=1.0,
            operand_fmt=cfg.low_fmt, accum_fmt=cfg.accum_fmt, out_fmt=store,
        )
    factors = LUFactors(W, None, cfg.panel_fmt, cfg.low_fmt, cfg.accum_fmt, nb)
    return factors, PivotStats.from_pivots(pivots)


def _permute_rows(X, lp):
    moved = np.flatnonzero(lp != np.arange(lp.size))
    if moved.size:
        X[moved] = X[lp[moved]]


def _sub_product(C, A, B):
    # C -= A @ B, column-chunked to bound the temporary
    step = max(1, _GEMM_TEMP_ELEMS // max(1, C.shape[0]))
    for j0 in range(0, C.shape[1], step):
        C[:, j0 : j0 + step] -= A @ B[:, j0 : j0 + step]


def _solve_unit_lower(L, B):
    # B <- L^-1 B in column chunks (bounded temporaries for large n)
    step = max(1, _GEMM_TEMP_ELEMS // max(1, B.shape[0]))
    for j0 in range(0, B.shape[1], step):
        B[:, j0 : j0 + step] = solve_triangular(L, B[:, j0 : j0 + step], lower=True,
                                                unit_diagonal=True, check_finite=False)


def _rec_lu(P, pivots, c, pivoting, floor):
    """Recursive LU of the tall block ``P`` in place; returns its row order."""
    m, w = P.shape
    if w <= _REC_BASE:
        lp = np.arange(m)
        for k in range(w):
            if pivoting:
                p = k + int(np.argmax(np.abs(P[k:, k])))
                if p != k:
                    P[[k, p]] = P[[p, k]]
                    lp[[k, p]] = lp[[p, k]]
            d = P[k, k]
            _check_pivot(d, c + k, floor)
            pivots[c + k] = abs(d)
            P[k + 1 :, k] /= d
            if k + 1 < w:
                P[k + 1 :, k + 1 :] -= np.multiply.outer(P[k + 1 :, k], P[k, k + 1 :])
        return lp
    w1 = w // 2
    lp = _rec_lu(P[:, :w1], pivots, c, pivoting, floor)
    _permute_rows(P[:, w1:], lp)
    _solve_unit_lower(P[:w1, :w1], P[:w1, w1:])
    _sub_product(P[w1:, w1:], P[w1:, :w1], P[:w1, w1:])
    lp2 = _rec_lu(P[w1:, w1:], pivots, c + w1, pivoting, floor)
    _permute_rows(P[w1:, :w1], lp2)
    lp[w1:] = lp[w1:][lp2]
    return lp


def lu_fp64(A, pivoting="partial", overwrite=False, pivot_floor=0.0):
    """Recursive float64 LU backed by level-3 BLAS.

    With ``pivoting="partial"`` the row holding the largest magnitude of the
    current column is selected at every step and that magnitude is recorded
    in the pivot statistics.  ``overwrite=True`` factors a Fortran-ordered
    float64 input in place (large runs cannot afford a copy).
    """
    if pivoting not in PIVOTING:
        raise ValueError(f"pivoting must be one of {PIVOTING}")
    A = _check_square(A)
    if overwrite and A.flags.f_contiguous:
        W = A
    else:
        W = np.array(A, dtype=np.float64, order="F")
    n = W.shape[0]
    pivots = np.empty(n)
    lp = _rec_lu(W, pivots, 0, pivoting == "partial", pivot_floor)
    perm = lp if pivoting == "partial" else None
    return LUFactors(W, perm, block_size=_REC_BASE), PivotStats.from_pivots(pivots)


def lu_partial_fp64(A, overwrite=False):
    return lu_fp64(A, "partial", overwrite=overwrite)


def lu_solve(f: LUFactors, b, solve_fmt=BINARY32):
    """Solve with packed factors; every operation rounded to ``solve_fmt``."""
    ar = Arith(solve_fmt)
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (f.n,):
        raise DimensionMismatch(f"rhs has shape {b.shape}, expected ({f.n},)")
    if ar.fmt == BINARY64:
        T = f.packed
    else:
        T = f._loaded.get(ar.fmt.name)
        if T is None:
            T = f._loaded.setdefault(ar.fmt.name, ar.load(f.packed))
    x = b[f.perm] if f.perm is not None else b
    X = ar.load(x.reshape(-1, 1))
    substitute(T, X, ar, lower=True, unit=True)
    substitute(T, X, ar, lower=False, unit=False)
    return X[:, 0].astype(np.float64)


def reconstruct_error(f: LUFactors, A) -> float:
    """``||L U - A[perm]||_inf / ||A||_inf`` in float64."""
    A = _check_square(A)
    PA = A[f.perm] if f.perm is not None else A
    nrm = mat_norm_inf(A)
    return mat_norm_inf(f.L @ f.U - PA) / nrm if nrm else mat_norm_inf(f.L @ f.U)


def flop_count(n: int):
    """Canonical operation counts ``(2/3 n^3 - 1/2 n^2, 2 n^2)``.

    The factorization count is rounded to the nearest integer.
    """
    n = int(n)
    return (4 * n**3 - 3 * n**2 + 3) // 6, 2 * n * n
