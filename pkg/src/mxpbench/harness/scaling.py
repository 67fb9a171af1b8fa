"""Two-sided power-of-two equilibration.

All scale factors are powers of two, so scaling and unscaling are exact.
"""
from __future__ import annotations

import numpy as np

from ..exceptions import DimensionMismatch, ZeroColumn, ZeroRow


def pow2_reciprocal_floor(m):
    """Largest power of two not exceeding ``1/m`` (computed exactly)."""
    frac, e = np.frexp(np.asarray(m, dtype=np.float64))
    # m = frac * 2**e with frac in [0.5, 1): 1/m lies in (2**-e, 2**(1-e)]
    return np.ldexp(1.0, np.where(frac == 0.5, 1 - e, -e))


def equilibrate(A):
    """Return ``(R A C, r, c)`` with r_i ~ 1/max_j|a_ij| then c_j ~ 1/max_i|(RA)_ij|.

    Each factor is rounded down to a power of two, so every entry of the
    result has magnitude at most 1.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    rmax = np.max(np.abs(A), axis=1)
    if np.any(rmax == 0):
        raise ZeroRow(f"row {int(np.flatnonzero(rmax == 0)[0])} is zero")
    r = pow2_reciprocal_floor(rmax)
    RA = A * r[:, None]
    cmax = np.max(np.abs(RA), axis=0)
    if np.any(cmax == 0):
        raise ZeroColumn(f"column {int(np.flatnonzero(cmax == 0)[0])} is zero")
    c = pow2_reciprocal_floor(cmax)
    return np.asfortranarray(RA * c[None, :]), r, c


def scale_rhs(b, r):
    return np.asarray(b, dtype=np.float64) * r


def unscale_solution(y, c):
    """Map the solution of ``(R A C) y = R b`` back to ``x = C y``."""
    return np.asarray(y, dtype=np.float64) * c
