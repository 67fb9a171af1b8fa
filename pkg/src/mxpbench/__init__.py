"""Mixed-precision dense linear solver benchmark: emulated low-precision LU,
GMRES refinement to float64 accuracy, and the validation harness."""
from .estimators import GMRESIRSolver, MixedPrecisionLU, PowerOfTwoEquilibrator
from .exceptions import (DegenerateSystem, DimensionMismatch, IndexOutOfRange, NotConverged,
                         NumericalBreakdown, SingularDiagonal, SingularPivot, ZeroColumn, ZeroRow)
from .harness import BenchReport, equilibrate, run_benchmark
from .gmresir import RefineConfig, RefineResult, apply_preconditioner, gmres_refine, initial_solution
from .lufact import (FactorConfig, LUFactors, PivotStats, flop_count, lu_fp64, lu_nopivot_mixed,
                     lu_partial_fp64, lu_solve, reconstruct_error)
from .matgen import GenSpec, generate_element, generate_matrix, generate_rhs, generate_system
from .metrics import backward_error, figure_of_merit, validate
from .precision import BFLOAT16, BINARY16, BINARY32, BINARY64, Format, fits, round_to, unit_roundoff

__version__ = "0.1.0"
