"""Instancias aleatorias, métricas de recuperación y arnés de benchmark."""

from .instances import ProblemInstance, gen_gaussian_instance, gen_instance
from .metrics import RECOVERY_THRESHOLD, FreedomStats, freedom_stats, is_recovered, nmae, rel_error
from .benchmark import (
    CSV_HEADER,
    BenchmarkRow,
    GridCell,
    TrialResult,
    read_benchmark_csv,
    run_benchmark,
    solve_with_profile,
    write_benchmark_csv,
)

__all__ = [
    'ProblemInstance', 'gen_gaussian_instance', 'gen_instance',
    'RECOVERY_THRESHOLD', 'FreedomStats', 'freedom_stats', 'is_recovered', 'nmae', 'rel_error',
    'CSV_HEADER', 'BenchmarkRow', 'GridCell', 'TrialResult', 'read_benchmark_csv',
    'run_benchmark', 'solve_with_profile', 'write_benchmark_csv',
]
