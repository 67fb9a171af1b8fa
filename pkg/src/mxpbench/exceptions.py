"""Exception types raised by the solver pipeline."""


class DimensionMismatch(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


class SingularDiagonal(ZeroDivisionError):
    """A triangular factor has a zero on its (non-unit) diagonal."""


class SingularPivot(ArithmeticError):
    """No-pivot elimination met a pivot below the configured floor.

    ``column`` is the elimination step at which the breakdown happened and
    ``value`` the offending pivot.
    """

    def __init__(self, column, value, msg=None):
        self.column = column
        self.value = value
        super().__init__(msg or f"pivot {value!r} at column {column} is below the floor")


class NotConverged(RuntimeError):
    """Refinement did not reach the backward-error target within the cap.

    The partial :class:`~mxpbench.gmresir.RefineResult` is kept on ``result``
    so callers can still report what happened.
    """

    def __init__(self, result, msg=None):
        self.result = result
        super().__init__(msg or f"not converged after {result.iterations} iterations")


class NumericalBreakdown(ArithmeticError):
    pass


class DegenerateSystem(ValueError):
    pass


class ZeroRow(ValueError):
    pass


class ZeroColumn(ValueError):
    pass
