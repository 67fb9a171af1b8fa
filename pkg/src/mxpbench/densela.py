"""Dense kernels with explicit precision control.

Matrices are 2-D float64 numpy arrays (Fortran order preferred) whose values
are quantized to whatever format the caller tracks; vectors are 1-D float64
arrays.  Every kernel fixes its reduction order, so results do not depend on
threading.
"""
from __future__ import annotations

import math

import numpy as np

from .exceptions import DimensionMismatch, SingularDiagonal
from .precision import BINARY64, Format, get_format, round_to

K_BLOCK = 256
_COL_TILE = 64
_NORM_CHUNK = 4096


class Arith:
    """Elementwise arithmetic whose every result is rounded to ``fmt``.

    Formats with a native numpy dtype compute directly in that dtype (IEEE
    ops are correctly rounded); others compute in float64 and re-round, which
    is exact emulation because float64 carries more than 2p+2 bits.
    """

    def __init__(self, fmt):
        self.fmt = get_format(fmt)
        self.native = self.fmt.dtype is not None
        self.dtype = self.fmt.dtype if self.native else np.float64

    def load(self, a):
        return np.array(round_to(a, self.fmt), dtype=self.dtype, order="F")

    def q(self, a):
        return a if self.native else round_to(a, self.fmt)

    def mul(self, a, b):
        return self.q(a * b)

    def sub(self, a, b):
        return self.q(a - b)

    def div(self, a, b):
        return self.q(a / b)


def _as_matrix(A, name="matrix"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {A.shape}")
    return A


def gemm_mixed(C, A, B, alpha=1.0, beta=0.0, operand_fmt=BINARY64, accum_fmt=BINARY64,
               out_fmt=None, trans_a=False, trans_b=False):
    """Return ``alpha * op(A) @ op(B) + beta * C`` with emulated precisions.

    Operands are rounded to ``operand_fmt``; every product and every running
    sum is rounded to ``accum_fmt``; the k-loop runs sequentially (in blocks
    of ``K_BLOCK``) so each output element sees one fixed summation order.
    The combination with ``C`` is evaluated in float64 and rounded to
    ``out_fmt`` (binary64 when omitted).  ``C`` may be None when beta == 0.
    """
    operand_fmt, accum_fmt = get_format(operand_fmt), get_format(accum_fmt)
    out_fmt = BINARY64 if out_fmt is None else get_format(out_fmt)
    if operand_fmt.precision_bits > accum_fmt.precision_bits:
        raise ValueError("operand format must not be wider than the accumulator")
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if trans_a:
        A = A.T
    if trans_b:
        B = B.T
    m, k = A.shape
    k2, n = B.shape
    if k != k2:
        raise DimensionMismatch(f"inner dimensions differ: {A.shape} x {B.shape}")
    if C is not None:
        C = _as_matrix(C, "C")
        if C.shape != (m, n):
            raise DimensionMismatch(f"C has shape {C.shape}, expected {(m, n)}")
    elif beta != 0:
        raise DimensionMismatch("C is required when beta != 0")

    ar = Arith(accum_fmt)
    Aq = np.asfortranarray(round_to(A, operand_fmt), dtype=ar.dtype)
    Bq = np.ascontiguousarray(round_to(B, operand_fmt), dtype=ar.dtype)
    acc = np.zeros((m, n), dtype=ar.dtype, order="F")
    if m and n:
        _accumulate(acc, Aq, Bq, ar)

    out = alpha * acc.astype(np.float64)
    if beta != 0:
        out = out + beta * C
    return np.asfortranarray(round_to(out, out_fmt))


def _accumulate(acc, Aq, Bq, ar: Arith):
    m, k = Aq.shape
    n = acc.shape[1]
    tmp = np.empty((m, min(_COL_TILE, n)), dtype=ar.dtype, order="F")
    # column tiles keep the running sums cache resident; per element the
    # k order is still 0, 1, ..., k-1
    for j0 in range(0, n, _COL_TILE):
        j1 = min(n, j0 + _COL_TILE)
        tile = acc[:, j0:j1]
        t = tmp[:, : j1 - j0]
        for k0 in range(0, k, K_BLOCK):
            for p in range(k0, min(k, k0 + K_BLOCK)):
                np.multiply(Aq[:, p, None], Bq[None, p, j0:j1], out=t)
                if ar.native:
                    tile += t
                else:
                    tile[...] = ar.q(tile + ar.q(t))


def trsm(T, B, fmt=BINARY64, side="left", lower=True, unit=False):
    """Solve ``T X = B`` (side="left") or ``X T = B`` (side="right").

    T is square triangular; only the triangle selected by ``lower`` is read.
    Every multiply, subtract and divide is rounded to ``fmt``.  B may be a
    vector or a matrix; a new array is returned.
    """
    ar = Arith(fmt)
    T = _as_matrix(T, "T")
    n = T.shape[0]
    if T.shape[1] != n:
        raise DimensionMismatch(f"T must be square, got {T.shape}")
    B = np.asarray(B, dtype=np.float64)
    vec = B.ndim == 1
    X = B.reshape(-1, 1) if vec else B
    if side == "right":
        X = X.T
        T = T.T
        lower = not lower
    if X.shape[0] != n:
        raise DimensionMismatch(f"T is {n}x{n} but right-hand side has {X.shape[0]} rows")
    d = np.diag(T)
    if not unit and np.any(d == 0):
        raise SingularDiagonal(f"zero on the diagonal at {int(np.flatnonzero(d == 0)[0])}")

    X = substitute(ar.load(T), ar.load(X), ar, lower, unit)
    X = X.astype(np.float64)
    if side == "right":
        X = X.T
    return X.ravel() if vec else np.asfortranarray(X)


def substitute(Tq, X, ar: Arith, lower=True, unit=False):
    """Triangular substitution on already-quantized operands, in place on X.

    Tq and X must already hold values of ``ar.dtype``; each unknown row is
    finished (divided) before being eliminated from the remaining rows.
    """
    n = Tq.shape[0]
    order = range(n) if lower else range(n - 1, -1, -1)
    for kk in order:
        if not unit:
            X[kk] = ar.div(X[kk], Tq[kk, kk])
        rows = slice(kk + 1, n) if lower else slice(0, kk)
        X[rows] = ar.sub(X[rows], ar.mul(Tq[rows, kk, None], X[None, kk]))
    return X


def matvec(A, x):
    """``A @ x`` in float64, accumulating columns in order 0..n-1."""
    A = _as_matrix(A, "A")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or A.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"cannot multiply {A.shape} by vector of shape {x.shape}")
    y = np.zeros(A.shape[0])
    return matvec_accumulate(y, A, x)


def matvec_accumulate(y, A, x):
    """In place ``y += A @ x`` with the same column order as :func:`matvec`."""
    for j in range(A.shape[1]):
        y += A[:, j] * x[j]
    return y


def vec_norm(x, which="two") -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("norm of an empty vector")
    ax = np.abs(x)
    if which in ("one", 1):
        return float(np.sum(ax))
    if which in ("inf", np.inf):
        return float(np.max(ax))
    if which not in ("two", 2):
        raise ValueError(f"unknown norm {which!r}")
    # single pass over chunks, rescaling the running sum of squares
    scale, ssq = 0.0, 1.0
    for c0 in range(0, x.size, _NORM_CHUNK):
        chunk = ax[c0 : c0 + _NORM_CHUNK]
        cmax = float(np.max(chunk))
        if cmax == 0.0:
            continue
        if not math.isfinite(cmax):
            return math.inf if not np.any(np.isnan(chunk)) else math.nan
        if cmax > scale:
            ssq = ssq * (scale / cmax) ** 2 if scale > 0 else 0.0
            scale = cmax
        ssq += float(np.sum((chunk / scale) ** 2))
    return scale * math.sqrt(ssq) if scale > 0 else 0.0


def mat_norm_inf(A) -> float:
    A = _as_matrix(A, "A")
    if A.size == 0:
        return 0.0
    return float(np.max(np.sum(np.abs(A), axis=1)))
