"""Benchmark orchestration: timed runs, validation, sweeps and CSV output."""
from ..metrics import backward_error, figure_of_merit, validate
from .bench import BenchReport, report_is_valid, run_benchmark
from .experiments import ExperimentRow, experiment_norm_sweep, experiment_pivot_sweep
from .scaling import equilibrate, scale_rhs, unscale_solution

__all__ = [
    "BenchReport", "ExperimentRow", "backward_error", "equilibrate", "experiment_norm_sweep",
    "experiment_pivot_sweep", "figure_of_merit", "report_is_valid", "run_benchmark",
    "scale_rhs", "unscale_solution", "validate",
]
