#!/usr/bin/env python3
"""
Reproducción lenta de las tablas de recuperación aleatoria.

Sólo corre con RUN_SLOW_TESTS=1; la versión completa (50 instancias por
celda) está en evals/run_benchmarks.py.
"""

import os
import sys
import logging
import statistics
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent))

from src.numerics.linalg import shrink_matrix
from src.numerics.operators import gradient
from src.problems.benchmark import run_benchmark, trial_seeds
from src.problems.instances import gen_instance
from src.problems.metrics import is_recovered, rel_error
from src.solvers.bregman import bregman_solve
from src.solvers.config import get_profile
from src.solvers.fpc import fpc_solve
from test_linalg import check_shrinkage_oracles

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

SLOW = os.getenv("RUN_SLOW_TESTS") == "1"
TRIALS = 10
# Diferencia tolerada en número de éxitos por la aleatoriedad de las instancias
NS_SLACK = 2

pytestmark = pytest.mark.skipif(not SLOW, reason="define RUN_SLOW_TESTS=1 para las pruebas lentas")


def _rows_by_rank(m, n, p, ranks, profile, trials=TRIALS):
    rows = run_benchmark([(m, n, r, p) for r in ranks], trials, profile, base_seed=2024)
    return {row.r: row for row in rows}


def test_shrinkage_oracles_full():
    check_shrinkage_oracles(count=1000, candidates=200, seed=1)


def test_fpc1_small_square():
    rows = _rows_by_rank(40, 40, 800, [1, 3], "fpc1")
    assert rows[1].NS >= 9
    assert rows[3].NS >= 6 - NS_SLACK
    assert all(row.RU < 1e-3 for row in rows.values() if row.NS)
    assert rows[1].RA <= 1e-6


def test_fpca_small_square():
    rows = _rows_by_rank(40, 40, 800, [1, 2, 3, 4, 5, 6, 9, 11], "fpca")
    for r in range(1, 7):
        assert rows[r].NS == TRIALS
        assert rows[r].RA <= 1e-4
    assert rows[9].NS >= 4
    assert rows[11].NS == 0


def test_fpca_medium_square():
    rows = _rows_by_rank(100, 100, 2000, [1, 3], "fpca", trials=5)
    for row in rows.values():
        assert row.NS == 5
        assert row.RU <= 1e-4


def test_fixed_point_residual_on_random_instances():
    config = get_profile("fpc1")
    worst = 0.0
    for trial in range(20):
        instance_seed, _ = trial_seeds(7, 0, trial)
        instance = gen_instance(30, 30, 2, 450, instance_seed)
        mask, b = instance.measurement_map, instance.b
        residuals = []

        def on_stage_end(summary):
            if summary.exit_reason == "xtol":
                X = summary.X
                target, _ = shrink_matrix(X - config.tau * gradient(mask, X, b), config.tau * summary.mu)
                residuals.append(np.linalg.norm(X - target) / max(1.0, np.linalg.norm(X)))

        fpc_solve(mask, b, config=config, on_stage_end=on_stage_end)
        worst = max([worst, *residuals])
    assert worst <= 10 * config.xtol


def test_bregman_improves_fpc2_by_two_orders():
    fpc2, bregman = get_profile("fpc2"), get_profile("bregman")
    reductions = []
    for trial in range(TRIALS):
        instance_seed, _ = trial_seeds(11, 0, trial)
        instance = gen_instance(40, 40, 1, 800, instance_seed)
        before = rel_error(fpc_solve(instance.measurement_map, instance.b, config=fpc2).X_opt, instance.M)
        if not is_recovered(before):
            continue
        after = rel_error(bregman_solve(instance.measurement_map, instance.b, config=bregman).X_opt, instance.M)
        reductions.append(before / after if after > 0 else float('inf'))
    assert reductions
    assert statistics.median(reductions) >= 100


def main():
    """Ejecuta las pruebas lentas sin pytest."""
    if not SLOW:
        logger.info("⏭️ RUN_SLOW_TESTS no está definido, nada que correr")
        return 0
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
