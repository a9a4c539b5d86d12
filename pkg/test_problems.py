#!/usr/bin/env python3
"""
Pruebas de instancias, métricas y del arnés de benchmark.
"""

import io
import sys
import logging
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest
import scipy.linalg

sys.path.append(str(Path(__file__).parent))

from src.numerics.operators import ExplicitAffine
from src.problems import benchmark
from src.problems.benchmark import (
    BenchmarkRow,
    GridCell,
    read_benchmark_csv,
    run_benchmark,
    trial_seeds,
    write_benchmark_csv,
)
from src.problems.instances import gen_gaussian_instance, gen_instance
from src.problems.metrics import freedom_stats, is_recovered, nmae, rel_error
from src.utils.error_handler import InputFormatError, NumericalError, ValidationError

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# FR de referencia para m = n = 40, p = 800 y r = 1..11 (cuatro decimales)
REFERENCE_FR = [0.0988, 0.1950, 0.2888, 0.3800, 0.4688, 0.5550, 0.6388, 0.7200, 0.7987, 0.8750, 0.9487]


# ----------------------------------------------------------------------
# Instancias
# ----------------------------------------------------------------------

def test_instance_invariants():
    instance = gen_instance(12, 9, 3, 50, seed=7)
    omega = instance.omega
    assert instance.p == 50 and omega.shape == (50, 2)
    assert len({tuple(pair) for pair in omega}) == 50
    np.testing.assert_array_equal(instance.b, instance.M[omega[:, 0], omega[:, 1]])
    sigma = scipy.linalg.svdvals(instance.M)
    assert int(np.count_nonzero(sigma > 1e-9 * sigma[0])) == 3


def test_same_seed_same_instance():
    first, second = gen_instance(10, 10, 2, 40, seed=3), gen_instance(10, 10, 2, 40, seed=3)
    np.testing.assert_array_equal(first.M, second.M)
    np.testing.assert_array_equal(first.omega, second.omega)
    other = gen_instance(10, 10, 2, 40, seed=4)
    assert not np.array_equal(first.M, other.M)


def test_full_sampling_observes_every_entry():
    instance = gen_instance(5, 4, 1, 20, seed=0)
    assert instance.measurement_map.to_boolean().all()


def test_instance_dimensions_are_validated():
    with pytest.raises(ValidationError):
        gen_instance(5, 4, 5, 10, seed=0)
    with pytest.raises(ValidationError):
        gen_instance(5, 4, 2, 21, seed=0)
    with pytest.raises(ValidationError):
        gen_instance(5, 4, 2, 0, seed=0)


def test_gaussian_instance_measures_the_matrix():
    instance = gen_gaussian_instance(6, 5, 2, 20, seed=1)
    assert isinstance(instance.measurement_map, ExplicitAffine)
    assert instance.omega is None
    expected = instance.measurement_map.coefficients @ instance.M.reshape(-1, order='F')
    np.testing.assert_allclose(instance.b, expected, atol=1e-12)


# ----------------------------------------------------------------------
# Métricas
# ----------------------------------------------------------------------

def test_rel_error_examples():
    M = np.arange(1.0, 7.0).reshape(2, 3)
    assert rel_error(M, M) == 0.0
    assert abs(rel_error(np.zeros_like(M), M) - 1.0) < 1e-15
    assert abs(rel_error(1.001 * M, M) - 1e-3) < 1e-12
    assert is_recovered(rel_error(1.0009 * M, M))
    assert not is_recovered(rel_error(1.001 * M, M) + 1e-12)
    with pytest.raises(ValidationError):
        rel_error(M, np.zeros_like(M))
    with pytest.raises(ValidationError):
        rel_error(M, M.T)


def test_freedom_stats_matches_reference_column():
    for r, expected in enumerate(REFERENCE_FR, start=1):
        stats = freedom_stats(40, 40, 800, r)
        assert abs(stats.FR - expected) <= 5e-5 + 1e-12
        assert stats.SR == 0.5
        assert stats.r_m == 11


def test_freedom_stats_example():
    stats = freedom_stats(100, 100, 2000, 1)
    assert abs(stats.SR - 0.2) < 1e-15
    assert abs(stats.FR - 0.0995) < 1e-15


def test_fr_at_most_one_iff_rank_within_limit():
    for m in (3, 7, 12):
        for n in (4, 9, 12):
            for p in sorted({1, m, m * n // 3, m * n // 2, m * n}):
                r_m = freedom_stats(m, n, p, 1).r_m
                for r in range(1, min(m, n) + 1):
                    assert (r * (m + n - r) <= p) == (r <= r_m)


def test_nmae_examples():
    assert nmae([[1.0, 2.0]], [[1.0, 2.0]], -10, 10) == 0.0
    assert abs(nmae([[3.0, -2.0], [0.0, 1.0]], [[1.0, 0.0], [2.0, -1.0]], -10, 10) - 0.1) < 1e-15
    assert abs(nmae([[5.0, -4.0]], [[3.0, -4.0]], -10, 10) - 0.05) < 1e-15


def test_nmae_validation():
    with pytest.raises(ValidationError):
        nmae([[1.0]], [[1.0]], 5, 5)
    with pytest.raises(ValidationError):
        nmae([[1.0, 2.0]], [[1.0]], -10, 10)
    with pytest.raises(ValidationError):
        nmae([], [], -10, 10)


# ----------------------------------------------------------------------
# Benchmark
# ----------------------------------------------------------------------

def test_trial_seeds_are_stable_and_distinct():
    assert trial_seeds(0, 1, 2) == trial_seeds(0, 1, 2)
    assert trial_seeds(0, 1, 2) != trial_seeds(0, 2, 1)
    assert trial_seeds(0, 0, 0) != trial_seeds(1, 0, 0)


def test_fully_observed_cell_is_recovered():
    rows = run_benchmark([(8, 8, 2, 64)], trials=1, solver_profile="fpc1")
    row = rows[0]
    assert row.NS == 1 and row.trials == 1 and row.aborted == 0
    assert row.RA == row.RU == row.RL
    assert row.RA < 1e-3
    assert row.AT is not None and row.AT >= 0


def test_benchmark_is_reproducible():
    grid = [GridCell(m=10, n=10, r=1, p=60), GridCell(m=10, n=10, r=2, p=70)]
    first = run_benchmark(grid, trials=2, solver_profile="fpc1", base_seed=5)
    second = run_benchmark(grid, trials=2, solver_profile="fpc1", base_seed=5)
    assert [row.without_timing() for row in first] == [row.without_timing() for row in second]
    assert [row.r for row in first] == [1, 2]


def test_aborted_trials_count_as_failures():
    def abort(*args, **kwargs):
        raise NumericalError("objetivo creciente", "fpc_solve")

    with patch.object(benchmark, "solve_with_profile", abort):
        rows = run_benchmark([(6, 6, 1, 20)], trials=3, solver_profile="fpc1")
    row = rows[0]
    assert row.NS == 0 and row.aborted == 3
    assert row.AT is None and row.RA is None and row.RU is None and row.RL is None


def test_instance_failure_is_a_failed_trial():
    real_gen_instance = benchmark.gen_instance

    def flaky(m, n, r, p, seed):
        if seed == trial_seeds(0, 0, 1)[0]:
            raise NumericalError("factor de rango deficiente", "gen_instance")
        return real_gen_instance(m, n, r, p, seed)

    with patch.object(benchmark, "gen_instance", flaky):
        rows = run_benchmark([(8, 8, 1, 60)], trials=3, solver_profile="fpc1", base_seed=0)
    row = rows[0]
    assert row.trials == 3 and row.aborted == 1
    assert row.NS == 2


def test_benchmark_arguments_are_validated():
    with pytest.raises(ValidationError):
        run_benchmark([(6, 6, 1, 20)], trials=0, solver_profile="fpc1")
    with pytest.raises(ValidationError):
        run_benchmark([(6, 6, 1, 20)], trials=1, solver_profile="fpc9")
    with pytest.raises(Exception):
        GridCell(m=4, n=4, r=5, p=10)


def test_benchmark_csv_round_trip():
    rows = [
        BenchmarkRow(r=1, FR=0.09875, NS=50, AT=0.1234, RA=1.5e-6, RU=3.25e-6, RL=1e-7),
        BenchmarkRow(r=6, FR=0.555, NS=0, AT=None, RA=None, RU=None, RL=None),
    ]
    buffer = io.StringIO()
    write_benchmark_csv(rows, buffer)
    text = buffer.getvalue()
    assert text.splitlines()[0] == "r,FR,NS,AT,RA,RU,RL"
    assert text.splitlines()[2] == "6,0.555,0,,,,"
    assert read_benchmark_csv(io.StringIO(text)) == rows


def test_benchmark_csv_errors_carry_line_numbers():
    with pytest.raises(InputFormatError) as excinfo:
        read_benchmark_csv(io.StringIO("r,FR,NS,AT,RA,RU,RL\n1,0.1,x,,,,\n"))
    assert excinfo.value.line == 2
    with pytest.raises(InputFormatError):
        read_benchmark_csv(io.StringIO("r,FR\n"))


def main():
    """Ejecuta las pruebas de este archivo sin pytest."""
    tests = [(name, func) for name, func in globals().items() if name.startswith("test_")]
    passed = 0
    for name, func in tests:
        try:
            func()
            passed += 1
            logger.info(f"✅ {name} PASÓ")
        except Exception as e:
            logger.error(f"❌ {name} FALLÓ: {e}")
    logger.info(f"📊 {passed}/{len(tests)} pruebas pasaron")
    return 0 if passed == len(tests) else 1


if __name__ == "__main__":
    sys.exit(main())
