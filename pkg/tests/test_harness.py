import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mxpbench.exceptions import DegenerateSystem, DimensionMismatch, ZeroColumn, ZeroRow
from mxpbench.gmresir import RefineConfig
from mxpbench.harness import bench as bench_mod
from mxpbench.harness import csvio
from mxpbench.harness.bench import BenchReport, report_is_valid, run_benchmark
from mxpbench.harness.experiments import (ExperimentRow, experiment_norm_sweep,
                                          experiment_pivot_sweep, fitness_cell, geometric_mean,
                                          pivot_cell, streamed_backward_error)
from mxpbench.harness.scaling import equilibrate, pow2_reciprocal_floor, scale_rhs, unscale_solution
from mxpbench.lufact import FactorConfig, lu_partial_fp64, lu_solve
from mxpbench.matgen import GenSpec, generate_matrix, generate_rhs
from mxpbench.metrics import backward_error, canonical_ops, figure_of_merit, validate


def fraction_berr(A, x, b):
    n = len(b)
    F = [[Fraction(v) for v in row] for row in A]
    xs, bs = [Fraction(v) for v in x], [Fraction(v) for v in b]
    r = max(abs(bs[i] - sum(F[i][j] * xs[j] for j in range(n))) for i in range(n))
    an = max(sum(abs(v) for v in row) for row in F)
    den = an * max(abs(v) for v in xs) + max(abs(v) for v in bs)
    return r / den / (n * Fraction(1, 2**53))


# ---- metrics ----------------------------------------------------------------

def test_backward_error_identity_is_zero():
    assert backward_error(np.eye(5), np.ones(5), np.ones(5)) == 0.0


def test_backward_error_hand_fixture():
    A = np.array([[2.0, 0.0], [0.0, 2.0]])
    x = np.array([1.0, 1.0])
    b = np.array([2.0, 2.0 + 2.0**-50])
    expected = Fraction(2) ** -50 / (4 + Fraction(2) ** -50) / (2 * Fraction(2) ** -53)
    got = backward_error(A, x, b)
    assert abs(Fraction(got) - expected) <= Fraction(1, 10**15) * expected


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_backward_error_against_exact_rational(n, seed):
    rng = np.random.default_rng(seed)
    A, x, b = rng.standard_normal((n, n)), rng.standard_normal(n), rng.standard_normal(n)
    exact = fraction_berr(A, x, b)
    assert abs(Fraction(backward_error(A, x, b)) - exact) <= Fraction(1, 10**12) * exact


def test_backward_error_errors():
    with pytest.raises(DegenerateSystem):
        backward_error(np.zeros((2, 2)), np.zeros(2), np.zeros(2))
    with pytest.raises(DimensionMismatch):
        backward_error(np.eye(2), np.ones(3), np.ones(2))


def test_validate_threshold():
    assert validate(15.999) and validate(0.0)
    assert not validate(16.0) and not validate(math.nan) and not validate(math.inf)


def test_figure_of_merit():
    assert figure_of_merit(1000, 1.0) == 2.0 / 3.0 * 1000.0**3 + 1.5 * 1000.0**2
    assert figure_of_merit(1000, 1.0) == pytest.approx(668_166_666.67, abs=0.01)
    assert figure_of_merit(0, 1.0) == 0.0
    for n in (1, 10, 1000, 4096):
        assert figure_of_merit(n, 2.0) == figure_of_merit(n, 1.0) / 2
        assert figure_of_merit(n, 0.5) == canonical_ops(n) / 0.5
    with pytest.raises(ValueError):
        figure_of_merit(10, 0.0)


# ---- scaling ----------------------------------------------------------------

def test_pow2_reciprocal_floor():
    assert pow2_reciprocal_floor(1.0) == 1.0
    assert pow2_reciprocal_floor(0.75) == 1.0
    assert pow2_reciprocal_floor(1.5) == 0.5
    assert pow2_reciprocal_floor(0.5) == 2.0  # 1/0.5 is exactly a power of two
    assert pow2_reciprocal_floor(3.0) == 0.25


def test_equilibrate_already_balanced_is_identity():
    A = np.array([[0.9, -0.6], [0.75, 1.0]])
    As, r, c = equilibrate(A)
    assert np.array_equal(r, [1, 1]) and np.array_equal(c, [1, 1]) and np.array_equal(As, A)


def test_equilibrate_diagonal_to_identity():
    As, r, c = equilibrate(np.diag([2.0**10, 2.0**-10]))
    assert np.array_equal(As, np.eye(2))
    assert np.array_equal(r, [2.0**-10, 2.0**10]) and np.array_equal(c, [1, 1])


def test_equilibrate_errors():
    with pytest.raises(ZeroRow):
        equilibrate(np.array([[1.0, 2.0], [0.0, 0.0]]))
    with pytest.raises(ZeroColumn):
        equilibrate(np.array([[1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(DimensionMismatch):
        equilibrate(np.ones((2, 3)))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.integers(-30, 30))
def test_equilibrate_properties(n, seed, shift):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) * 2.0 ** rng.integers(-20, 20, size=(n, 1)) * 2.0**shift
    As, r, c = equilibrate(A)
    assert np.max(np.abs(As)) <= 1.0
    assert np.all(np.max(np.abs(As), axis=1) > 0.25)
    assert np.array_equal(As, (A * r[:, None]) * c[None, :])
    y = rng.standard_normal(n)
    assert np.array_equal(unscale_solution(y / c, c), y)
    assert np.array_equal(scale_rhs(np.ones(n), r), r)


def test_unscale_identity():
    y = np.array([1.5, -2.0])
    assert np.array_equal(unscale_solution(y, np.ones(2)), y)


# ---- benchmark --------------------------------------------------------------

def test_report_validity_is_pure():
    assert report_is_valid(1.0, 3, False)
    assert not report_is_valid(16.0, 3, False)
    assert not report_is_valid(1.0, 51, False)
    assert not report_is_valid(1.0, 11, False, max_iters=10)
    assert not report_is_valid(0.0, 0, True)
    assert not report_is_valid(math.nan, 1, False)


def test_run_benchmark_default_is_valid():
    rep = run_benchmark(GenSpec(512, 3))
    assert rep.valid and not rep.debug_only and not rep.breakdown
    assert 1 <= rep.iterations <= 10 and rep.berr < 16
    assert rep.t_total == rep.t_scale + rep.t_factor + rep.t_refine
    assert rep.fom_ops_per_sec == figure_of_merit(512, rep.t_total)


def test_run_benchmark_equilibrated_also_valid():
    rep = run_benchmark(GenSpec(256, 5), use_equilibration=True)
    assert rep.valid and rep.equilibrate and rep.t_scale > 0


def test_run_benchmark_linear_n_is_debug_only():
    rep = run_benchmark(GenSpec(256, 0, diag_scaling="linear_n"))
    assert rep.debug_only and not rep.valid and rep.berr < 16


def test_run_benchmark_not_converged_is_invalid_report():
    rep = run_benchmark(GenSpec(200, 2, diag_scaling="none"), FactorConfig(pivot_floor=0.0),
                        RefineConfig(max_iters=3))
    assert not rep.valid and rep.iterations == 4


def test_run_benchmark_breakdown_is_reported():
    rep = run_benchmark(GenSpec(64, 0, diag_scaling="none"), FactorConfig(pivot_floor=1e6))
    assert rep.breakdown and not rep.valid and rep.fom_ops_per_sec == 0.0


def test_untimed_phases_excluded(monkeypatch):
    delay = 0.3
    real_gen, real_berr = bench_mod.generate_matrix, bench_mod.backward_error

    def slow_gen(*a, **k):
        time.sleep(delay)
        return real_gen(*a, **k)

    def slow_berr(*a, **k):
        time.sleep(delay)
        return real_berr(*a, **k)

    monkeypatch.setattr(bench_mod, "generate_matrix", slow_gen)
    monkeypatch.setattr(bench_mod, "backward_error", slow_berr)
    t0 = time.perf_counter()
    rep = run_benchmark(GenSpec(64, 1))
    wall = time.perf_counter() - t0
    assert wall >= 2 * delay
    assert rep.t_total < delay and rep.valid


# ---- CSV --------------------------------------------------------------------

floats = st.floats(allow_nan=False, allow_infinity=True, width=64)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 46340), st.integers(0, 2**63), st.sampled_from(["uniform", "gaussian"]),
       st.sampled_from(["none", "sqrt_n", "linear_n", "ddd"]), floats, floats, floats,
       st.integers(0, 51), floats, st.booleans(), st.booleans())
def test_bench_csv_round_trip(n, seed, dist, scale, ts, tf, tr, iters, berr, eq, valid):
    theta = 0.5 if scale == "ddd" else None
    spec = GenSpec(n, seed, dist, scale, theta)
    rep = BenchReport(spec, FactorConfig(low_fmt="bf16", block_size=64), RefineConfig(), eq,
                      ts, tf, tr, ts + tf + tr, iters, berr, 1.25e9, valid, spec.debug_only)
    text = csvio.bench_csv([rep])
    assert text.splitlines()[0] == ",".join(csvio.BENCH_COLUMNS)
    back = csvio.bench_from_record(csvio.loads(text, csvio.BENCH_COLUMNS)[0])
    assert csvio.bench_csv([back]) == text
    for name in ("t_scale", "t_factor", "t_refine", "t_total", "iterations", "berr",
                 "valid", "equilibrate", "debug_only"):
        a, b = getattr(rep, name), getattr(back, name)
        assert a == b or (isinstance(a, float) and math.isnan(a) and math.isnan(b))
    assert back.spec == spec and back.factor_cfg == rep.factor_cfg


def test_nan_berr_round_trips():
    rep = BenchReport(GenSpec(8))
    back = csvio.bench_from_record(csvio.loads(csvio.bench_csv([rep]))[0])
    assert back.breakdown


def test_loads_rejects_wrong_header():
    with pytest.raises(ValueError):
        csvio.loads("a,b\n1,2\n", csvio.PIVOT_COLUMNS)


def test_experiment_csv_round_trip():
    rows = [ExperimentRow(10, 1, max_pivot=3.25, max_pivot_col=9)]
    text = csvio.pivot_csv(rows)
    assert text.splitlines()[0] == "n,seed,max_pivot,max_pivot_col,sqrt_n,c58_sqrt_n,n_045"
    assert csvio.pivot_csv([csvio.pivot_from_record(r) for r in csvio.loads(text)]) == text
    rows = [ExperimentRow(10, 1, pivoting="none", norm1=1e-12, norm2=5e-13, norminf=4e-13)]
    text = csvio.norm_csv(rows)
    assert text.splitlines()[0] == "n,seed,pivoting,norm1,norm2,norminf,status"
    assert csvio.norm_csv([csvio.norm_from_record(r) for r in csvio.loads(text)]) == text


# ---- experiments ------------------------------------------------------------

def test_pivot_sweep_rows():
    rows = experiment_pivot_sweep([100, 50], 3, base_seed=7)
    assert [(r.n, r.seed) for r in rows] == [(50, 7), (50, 8), (50, 9), (100, 7), (100, 8), (100, 9)]
    for r in rows:
        assert r.max_pivot > 0 and 0 <= r.max_pivot_col < r.n
        assert r.sqrt_n == math.sqrt(r.n) and r.c58_sqrt_n == 0.625 * math.sqrt(r.n)
        assert r.n_045 == r.n**0.45
    assert math.isclose(ExperimentRow(1000, 0).sqrt_n, 31.6228, rel_tol=1e-5)


def test_pivot_cell_matches_reference_lu():
    import scipy.linalg as sla
    A = generate_matrix(GenSpec(80, 4, "uniform", "none"))
    U = sla.lu(A)[2]
    d = np.abs(np.diag(U))
    row = pivot_cell(80, 4)
    assert row.max_pivot == pytest.approx(d.max(), rel=1e-12)
    assert row.max_pivot_col == int(np.argmax(d))


def test_sweep_rejects_out_of_range_size():
    with pytest.raises(ValueError):
        experiment_pivot_sweep([0], 1)


def test_norm_sweep_chain_and_residual():
    rows = experiment_norm_sweep([64, 128], 3, "partial")
    for r in rows:
        assert r.status == "ok"
        assert 0 <= r.norminf <= r.norm2 <= r.norm1
    spec = GenSpec(64, 0, "uniform", "none")
    A, b = generate_matrix(spec), generate_rhs(spec)
    x = lu_solve(lu_partial_fp64(A)[0], b, "fp64")
    assert rows[0].norminf == pytest.approx(np.max(np.abs(A @ x - b)), rel=0.5, abs=1e-15)


def test_norm_sweep_no_pivot_worse_than_pivot():
    piv = experiment_norm_sweep([256], 4, "partial")
    nop = experiment_norm_sweep([256], 4, "none")
    assert geometric_mean([r.norminf for r in nop]) > geometric_mean([r.norminf for r in piv])


def test_streamed_backward_error_matches_dense():
    spec = GenSpec(300, 2)
    A, b = generate_matrix(spec), generate_rhs(spec)
    x = np.linalg.solve(A, b)
    assert streamed_backward_error(spec, x, b) == pytest.approx(backward_error(A, x, b), rel=1e-12)


def test_fitness_cell_small():
    berr, status = fitness_cell(256, 0)
    assert status == "ok" and berr < 16


def test_geometric_mean():
    assert geometric_mean([1e-2, 1e2]) == pytest.approx(1.0)
    assert geometric_mean([4.0]) == pytest.approx(4.0)
