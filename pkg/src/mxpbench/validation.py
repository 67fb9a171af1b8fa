"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DimensionMismatch


def check_square_matrix(A) -> np.ndarray:
    """Finite float64 square matrix in Fortran order."""
    A = check_array(A, dtype=np.float64, order="F", ensure_all_finite=True, copy=False)
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def check_rhs(b, n: int) -> np.ndarray:
    b = check_array(b, dtype=np.float64, ensure_2d=False, ensure_all_finite=True)
    if b.ndim != 1 or b.shape[0] != n:
        raise DimensionMismatch(f"right-hand side must have shape ({n},), got {b.shape}")
    return b
