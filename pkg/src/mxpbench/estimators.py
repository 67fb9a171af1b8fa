"""scikit-learn style wrappers around the solver pipeline.

``fit`` takes the system matrix and does the expensive, matrix-only work
(equilibration, factorization); ``solve`` (alias ``predict``) maps a
right-hand side to a solution.  Hyper-parameters follow the usual
``get_params``/``set_params`` contract, so the objects clone and grid-search
like any other estimator.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import NotConverged
from .gmresir import RefineConfig, gmres_refine, initial_solution
from .harness.scaling import equilibrate, scale_rhs, unscale_solution
from .lufact import FactorConfig, lu_nopivot_mixed, lu_solve
from .metrics import backward_error
from .validation import check_rhs, check_square_matrix


class PowerOfTwoEquilibrator(TransformerMixin, BaseEstimator):
    """Row-then-column scaling by powers of two (exactly invertible)."""

    def fit(self, A, y=None):
        A = check_square_matrix(A)
        _, self.row_scale_, self.col_scale_ = equilibrate(A)
        self.n_features_in_ = A.shape[1]
        return self

    def transform(self, A):
        check_is_fitted(self, "row_scale_")
        A = check_square_matrix(A)
        return np.asfortranarray(A * self.row_scale_[:, None] * self.col_scale_[None, :])

    def scale_rhs(self, b):
        check_is_fitted(self, "row_scale_")
        return scale_rhs(check_rhs(b, self.row_scale_.size), self.row_scale_)

    def unscale_solution(self, y):
        check_is_fitted(self, "col_scale_")
        return unscale_solution(y, self.col_scale_)


class MixedPrecisionLU(BaseEstimator):
    """No-pivot LU with emulated low-precision panel and trailing updates."""

    def __init__(self, low="fp16", panel="fp32", accum="fp32", block_size=128,
                 pivot_floor=2.0**-40):
        self.low = low
        self.panel = panel
        self.accum = accum
        self.block_size = block_size
        self.pivot_floor = pivot_floor

    def _config(self):
        return FactorConfig(panel_fmt=self.panel, low_fmt=self.low, accum_fmt=self.accum,
                            block_size=self.block_size, pivot_floor=self.pivot_floor)

    def fit(self, A, y=None):
        A = check_square_matrix(A)
        self.factors_, self.pivot_stats_ = lu_nopivot_mixed(A, self._config())
        self.n_features_in_ = A.shape[1]
        return self

    def solve(self, b, fmt="fp64"):
        check_is_fitted(self, "factors_")
        return lu_solve(self.factors_, check_rhs(b, self.n_features_in_), fmt)


class GMRESIRSolver(BaseEstimator):
    """Low-precision LU + GMRES refinement to float64 backward error.

    After ``solve`` the attributes ``n_iter_``, ``berr_history_``,
    ``converged_`` and ``berr_`` (against the unscaled system) describe the
    last solve.  With ``raise_on_failure=False`` an unconverged solve
    returns its best iterate instead of raising :class:`NotConverged`.
    """

    def __init__(self, low="fp16", panel="fp32", accum="fp32", block_size=128,
                 pivot_floor=2.0**-40, max_iter=50, berr_target=1.0, precond="fp64",
                 reorthogonalize="heuristic", equilibrate=False, raise_on_failure=True):
        self.low = low
        self.panel = panel
        self.accum = accum
        self.block_size = block_size
        self.pivot_floor = pivot_floor
        self.max_iter = max_iter
        self.berr_target = berr_target
        self.precond = precond
        self.reorthogonalize = reorthogonalize
        self.equilibrate = equilibrate
        self.raise_on_failure = raise_on_failure

    def fit(self, A, y=None):
        A = check_square_matrix(A)
        self.A_ = A
        if self.equilibrate:
            self.equilibrator_ = PowerOfTwoEquilibrator().fit(A)
            self.A_scaled_ = self.equilibrator_.transform(A)
        else:
            self.equilibrator_ = None
            self.A_scaled_ = A
        lu = MixedPrecisionLU(self.low, self.panel, self.accum, self.block_size,
                              self.pivot_floor).fit(self.A_scaled_)
        self.factors_ = lu.factors_
        self.pivot_stats_ = lu.pivot_stats_
        self.n_features_in_ = A.shape[1]
        return self

    def solve(self, b):
        check_is_fitted(self, "factors_")
        b = check_rhs(b, self.n_features_in_)
        eq = self.equilibrator_
        bs = eq.scale_rhs(b) if eq is not None else b
        cfg = RefineConfig(max_iters=self.max_iter, berr_target=self.berr_target,
                           precond_fmt=self.precond, reorthogonalize=self.reorthogonalize)
        x0 = initial_solution(self.factors_, bs, cfg)
        try:
            res = gmres_refine(self.A_scaled_, self.factors_, bs, x0, cfg)
        except NotConverged as exc:
            res = exc.result
            if self.raise_on_failure:
                self._record(res, b)
                raise
        return self._record(res, b)

    predict = solve

    def _record(self, res, b):
        x = self.equilibrator_.unscale_solution(res.x) if self.equilibrator_ is not None else res.x
        self.result_ = res
        self.n_iter_ = res.iterations
        self.berr_history_ = list(res.berr_history)
        self.converged_ = res.converged
        self.berr_ = backward_error(self.A_, x, b)
        return x
