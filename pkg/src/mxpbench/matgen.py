"""Reproducible benchmark systems built from addressable random draws.

Off-diagonal entries are raw draws.  The diagonal keeps the sign of its own
draw and is shifted (or, for ``ddd``, replaced) according to the scaling
scheme, which controls whether elimination without pivoting is safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import IndexOutOfRange
from .rngstream import STREAM_MATRIX, STREAM_RHS, gaussian_block, uniform_block

N_MAX = 46340
DISTRIBUTIONS = ("uniform", "gaussian")
SCALINGS = ("none", "sqrt_n", "linear_n", "ddd")
DEFAULT_THETA = 0.95

# memory cap for one generated column chunk (elements)
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class GenSpec:
    n: int
    seed: int = 0
    distribution: str = "uniform"
    diag_scaling: str = "sqrt_n"
    theta: Optional[float] = None

    def __post_init__(self):
        if not 1 <= self.n <= N_MAX:
            raise ValueError(f"n must be in [1, {N_MAX}], got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if self.diag_scaling not in SCALINGS:
            raise ValueError(f"diag_scaling must be one of {SCALINGS}")
        if self.diag_scaling == "ddd":
            if self.theta is None:
                object.__setattr__(self, "theta", DEFAULT_THETA)
            if not 0 < self.theta <= 1:
                raise ValueError("theta must lie in (0, 1]")
        elif self.theta is not None:
            raise ValueError("theta is only meaningful for ddd scaling")

    @property
    def debug_only(self) -> bool:
        """Linear-n diagonal shifts make the problem too easy for official runs."""
        return self.diag_scaling == "linear_n"


@dataclass
class GeneratedSystem:
    A: np.ndarray
    b: np.ndarray
    spec: GenSpec


def _draws(spec: GenSpec, rows, cols) -> np.ndarray:
    block = gaussian_block if spec.distribution == "gaussian" else uniform_block
    return block(spec.seed, STREAM_MATRIX, rows, cols)


def _sign(u):
    return np.where(u < 0, -1.0, 1.0)


def _offdiag_abs_sums(spec: GenSpec, rows) -> np.ndarray:
    # fsum is correctly rounded, so the value does not depend on how rows
    # are batched
    out = np.empty(len(rows))
    cols = np.arange(spec.n)
    step = max(1, _CHUNK_ELEMS // spec.n)
    for r0 in range(0, len(rows), step):
        rr = np.asarray(rows[r0 : r0 + step])
        a = np.abs(_draws(spec, rr, cols))
        a[np.arange(len(rr)), rr] = 0.0
        out[r0 : r0 + len(rr)] = [math.fsum(row) for row in a]
    return out


def _diagonal(spec: GenSpec, idx, u) -> np.ndarray:
    s = _sign(u)
    scheme = spec.diag_scaling
    if scheme == "none":
        return u
    if scheme == "sqrt_n":
        return u + s * math.sqrt(spec.n)
    if scheme == "linear_n":
        return u + s * float(spec.n)
    return s * spec.theta * _offdiag_abs_sums(spec, idx)


def _check_index(spec, *idx):
    for k in idx:
        if not 0 <= k < spec.n:
            raise IndexOutOfRange(f"index {k} outside [0, {spec.n})")


def generate_element(spec: GenSpec, i: int, j: int) -> float:
    _check_index(spec, i, j)
    u = _draws(spec, [i], [j])[0, 0]
    if i != j:
        return float(u)
    return float(_diagonal(spec, [i], np.array([u]))[0])


def generate_columns(spec: GenSpec, j0: int, j1: int) -> np.ndarray:
    """Columns ``j0:j1`` of the matrix as an (n, j1-j0) Fortran array."""
    _check_index(spec, j0)
    if not j0 < j1 <= spec.n:
        raise IndexOutOfRange(f"bad column range [{j0}, {j1})")
    cols = np.arange(j0, j1)
    block = np.asfortranarray(_draws(spec, np.arange(spec.n), cols))
    k = np.arange(j0, j1)
    block[k, k - j0] = _diagonal(spec, k, block[k, k - j0])
    return block


def iter_column_blocks(spec: GenSpec, width: Optional[int] = None):
    """Yield ``(j0, j1, block)`` covering the matrix left to right."""
    width = width or max(1, _CHUNK_ELEMS // spec.n)
    for j0 in range(0, spec.n, width):
        j1 = min(spec.n, j0 + width)
        yield j0, j1, generate_columns(spec, j0, j1)


def generate_matrix(spec: GenSpec, out: Optional[np.ndarray] = None) -> np.ndarray:
    """Full n x n matrix in column-major order.

    ``out`` lets large runs reuse a preallocated buffer.
    """
    n = spec.n
    if out is None:
        try:
            out = np.empty((n, n), order="F")
        except MemoryError as exc:
            raise MemoryError(f"cannot allocate a {n}x{n} float64 matrix") from exc
    for j0, j1, block in iter_column_blocks(spec):
        out[:, j0:j1] = block
    return out


def generate_rhs(spec: GenSpec) -> np.ndarray:
    return uniform_block(spec.seed, STREAM_RHS, np.arange(spec.n), [0])[:, 0].copy()


def generate_system(spec: GenSpec) -> GeneratedSystem:
    return GeneratedSystem(generate_matrix(spec), generate_rhs(spec), spec)
