#!/usr/bin/env python3
"""
Pruebas de FPC / FPCA, debiasing y Bregman.
"""

import sys
import logging
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

sys.path.append(str(Path(__file__).parent))

from src.numerics.linalg import SvdFactors, full_svd, nuclear_norm, shrink_matrix
from src.numerics.operators import EntryMask, gradient
from src.problems.instances import gen_instance
from src.problems.metrics import rel_error
from src.solvers.bregman import bregman_solve
from src.solvers.config import (
    PROFILES,
    SvdMode,
    build_config,
    default_column_samples,
    get_profile,
    max_identifiable_rank,
)
from src.solvers.debias import debias, nnls_projected_gradient
from src.solvers.fpc import fpc_solve, prox_step, stopping_g, stopping_x
from src.utils.error_handler import ValidationError

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def _low_rank(m, n, r, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, r)) @ rng.standard_normal((r, n))


def _fully_observed(M):
    mask = EntryMask.full(M.shape)
    return mask, mask.apply(M)


# ----------------------------------------------------------------------
# Reglas de parada y paso de punto fijo
# ----------------------------------------------------------------------

def test_stopping_x_examples():
    X = np.ones((2, 2))
    assert stopping_x(X, X, 1e-10)
    assert not stopping_x(np.zeros((2, 2)), np.full((2, 2), 0.5), 1e-10)
    # ||X_prev|| = 2 divide el cociente
    assert stopping_x(X, X + np.diag([1e-10, 0.0]), 1e-10)


def test_stopping_g_examples():
    factors = full_svd(np.diag([2.0, 0.0]))
    mu = 0.5
    # g = -mu U V^T es exactamente la condición de optimalidad
    g = -mu * factors.U @ factors.V.T
    assert stopping_g(factors, g, mu, 1e-4)
    assert not stopping_g(factors, np.diag([0.0, 1.0]), mu, 1e-4)


def test_prox_step_shifts_singular_values():
    M = _low_rank(6, 5, 2, seed=0)
    mask, b = _fully_observed(M)
    sigma = scipy.linalg.svdvals(M)
    mu = 0.1 * sigma[1]
    X_next, Y, factors = prox_step(M, mask, b, 1.0, mu)
    np.testing.assert_allclose(Y, M, atol=1e-12)
    np.testing.assert_allclose(factors.sigma, sigma[:2] - mu, rtol=1e-10)
    assert factors.rank == 2


def test_prox_step_full_shrinkage_gives_zero():
    M = _low_rank(4, 4, 2, seed=1)
    mask, b = _fully_observed(M)
    X_next, _, factors = prox_step(np.zeros((4, 4)), mask, b, 1.0, 2.0 * scipy.linalg.svdvals(M)[0])
    assert factors.rank == 0
    assert not np.any(X_next)


def test_gradient_step_is_nonexpansive():
    rng = np.random.default_rng(2)
    mask = EntryMask.from_boolean(rng.random((8, 8)) < 0.5)
    b = rng.standard_normal(mask.p)
    for _ in range(20):
        X1, X2 = rng.standard_normal((8, 8)), rng.standard_normal((8, 8))
        h1 = X1 - gradient(mask, X1, b)
        h2 = X2 - gradient(mask, X2, b)
        assert np.linalg.norm(h1 - h2) <= np.linalg.norm(X1 - X2) + 1e-9


def test_prox_step_minimizes_the_proximal_objective():
    rng = np.random.default_rng(13)
    mask = EntryMask.from_boolean(rng.random((7, 6)) < 0.6)
    b = rng.standard_normal(mask.p)
    tau, mu = 1.0, 0.3

    def prox_objective(Z, Y):
        return tau * mu * nuclear_norm(Z) + 0.5 * np.linalg.norm(Z - Y) ** 2

    for _ in range(20):
        X_next, Y, _ = prox_step(rng.standard_normal((7, 6)), mask, b, tau, mu)
        best = prox_objective(X_next, Y)
        assert best <= prox_objective(Y, Y) + 1e-12
        assert best <= prox_objective(np.zeros_like(Y), Y) + 1e-12


def test_distance_to_solution_does_not_increase_when_fully_observed():
    # Con observación completa X* = S_mu(B) es el minimizador exacto
    B = _low_rank(6, 6, 2, seed=14) + 0.1 * np.random.default_rng(15).standard_normal((6, 6))
    mask, b = _fully_observed(B)
    mu = 0.5
    X_star, _ = shrink_matrix(B, mu)
    for tau in (0.5, 1.5):
        X = np.random.default_rng(16).standard_normal((6, 6))
        distance = np.linalg.norm(X - X_star)
        for _ in range(40):
            X, _, _ = prox_step(X, mask, b, tau, mu)
            next_distance = np.linalg.norm(X - X_star)
            assert next_distance <= distance + 1e-10
            distance = next_distance
        assert distance <= 1e-6


def test_distance_to_solution_does_not_increase_on_completion():
    instance = gen_instance(10, 10, 1, 60, seed=17)
    mask, b = instance.measurement_map, instance.b
    mu = 0.05
    config = build_config({"mu_bar": mu, "xtol": 1e-13, "inner_max": 20000})
    X_star = fpc_solve(mask, b, config=config).X_opt

    X = np.zeros((10, 10))
    distance = np.linalg.norm(X - X_star)
    for _ in range(100):
        X, _, _ = prox_step(X, mask, b, 1.0, mu)
        next_distance = np.linalg.norm(X - X_star)
        assert next_distance <= distance + 1e-8
        distance = next_distance


def test_stopping_g_fires_at_a_converged_solution():
    instance = gen_instance(20, 20, 2, 240, seed=18)
    mask, b = instance.measurement_map, instance.b
    mu = 1e-2
    config = build_config({"mu_bar": mu, "xtol": 1e-13, "inner_max": 20000})
    X = fpc_solve(mask, b, config=config).X_opt
    assert stopping_g(full_svd(X), gradient(mask, X, b), mu, 1e-4)
    # En X = 0 el gradiente -A^*(b) / mu es demasiado grande
    assert not stopping_g(SvdFactors.empty(20, 20), gradient(mask, np.zeros((20, 20)), b), mu, 1e-4)


# ----------------------------------------------------------------------
# FPC
# ----------------------------------------------------------------------

@pytest.mark.parametrize("beta,expected", [(2.0, 1.5), (-2.0, -1.5)])
def test_scalar_problem_is_soft_thresholding(beta, expected):
    mask = EntryMask.full((1, 1))
    report = fpc_solve(mask, [beta], config=build_config({"mu_bar": 0.5}))
    assert abs(report.X_opt[0, 0] - expected) < 1e-12
    assert report.mu_path == (0.5,)


def test_zero_data_returns_zero():
    mask = EntryMask.full((3, 4))
    report = fpc_solve(mask, np.zeros(12))
    assert not np.any(report.X_opt)
    assert report.svd_calls == 0
    assert report.final_rank == 0
    assert report.stage_exits == ("zero_data",)


def test_step_size_is_validated():
    M = _low_rank(4, 4, 1, seed=3)
    mask, b = _fully_observed(M)
    with pytest.raises(ValidationError):
        fpc_solve(mask, b, config=build_config({"tau": 2.5}))
    with pytest.raises(ValidationError):
        fpc_solve(mask, b, config=build_config({"tau": 2.0}))
    report = fpc_solve(mask, b, config=build_config({"tau": 2.0, "allow_boundary_tau": True,
                                                     "inner_max": 5}))
    assert report.X_opt.shape == (4, 4)


def test_input_shapes_are_validated():
    mask = EntryMask.full((2, 2))
    with pytest.raises(ValidationError):
        fpc_solve(mask, np.ones(3))
    with pytest.raises(ValidationError):
        fpc_solve(mask, np.ones(4), shape=(2, 3))
    with pytest.raises(ValidationError):
        fpc_solve(mask, np.ones(4), X0=np.zeros((3, 3)))


def test_fully_observed_matrix_is_recovered():
    M = _low_rank(10, 10, 2, seed=4)
    mask, b = _fully_observed(M)
    report = fpc_solve(mask, b, shape=(10, 10))
    assert rel_error(report.X_opt, M) <= 1e-4
    assert report.final_rank == 2
    path = report.mu_path
    assert all(later < earlier for earlier, later in zip(path, path[1:]))
    assert path[-1] == PROFILES["fpc1"].mu_bar
    assert len(report.inner_iterations) == len(path) == len(report.stage_exits)


def test_fpc1_recovers_rank_one_completion():
    instance = gen_instance(40, 40, 1, 800, seed=11)
    report = fpc_solve(instance.measurement_map, instance.b, config=get_profile("fpc1"))
    assert rel_error(report.X_opt, instance.M) < 1e-3


def test_fixed_point_residual_at_stage_exit():
    instance = gen_instance(30, 30, 2, 450, seed=5)
    config = get_profile("fpc1")
    mask, b = instance.measurement_map, instance.b
    residuals = []

    def on_stage_end(summary):
        if summary.exit_reason != "xtol":
            return
        X = summary.X
        target, _ = shrink_matrix(X - config.tau * gradient(mask, X, b), config.tau * summary.mu)
        residuals.append(np.linalg.norm(X - target) / max(1.0, np.linalg.norm(X)))

    fpc_solve(mask, b, config=config, on_stage_end=on_stage_end)
    assert residuals
    assert max(residuals) <= 10 * config.xtol


def test_objective_decreases_within_each_stage():
    instance = gen_instance(20, 20, 2, 240, seed=6)
    objectives = {}

    def on_iteration(state):
        objectives.setdefault(state.stage, []).append(state.objective)

    fpc_solve(instance.measurement_map, instance.b, config=get_profile("fpc1"), on_iteration=on_iteration)
    assert objectives
    for values in objectives.values():
        for before, after in zip(values, values[1:]):
            assert after <= before + 1e-9 * max(1.0, abs(before))


def test_gtol_rule_marks_stage_exits():
    M = _low_rank(8, 8, 2, seed=7)
    mask, b = _fully_observed(M)
    report = fpc_solve(mask, b, config=get_profile("fpc2"))
    assert rel_error(report.X_opt, M) <= 1e-4
    assert set(report.stage_exits) <= {"xtol+gtol", "inner_max"}


# ----------------------------------------------------------------------
# FPCA
# ----------------------------------------------------------------------

def test_fpca_recovers_rank_two_completion():
    instance = gen_instance(40, 40, 2, 800, seed=12)
    report = fpc_solve(instance.measurement_map, instance.b, config=get_profile("fpca"))
    assert rel_error(report.X_opt, instance.M) < 1e-3

    c_s = default_column_samples(40, 40, 800)
    assert report.ks_history[0] == c_s
    assert all(1 <= ks <= c_s for ks in report.ks_history)
    assert len(report.ks_history) == report.svd_calls


def test_fpca_is_deterministic_per_seed():
    instance = gen_instance(20, 20, 1, 200, seed=8)
    config = get_profile("fpca").with_overrides(seed=99)
    first = fpc_solve(instance.measurement_map, instance.b, config=config)
    second = fpc_solve(instance.measurement_map, instance.b, config=config)
    np.testing.assert_array_equal(first.X_opt, second.X_opt)
    assert first.ks_history == second.ks_history


def test_fpca_easy_profile_recovers_low_rank_matrix():
    instance = gen_instance(100, 100, 10, 5666, seed=21)
    report = fpc_solve(instance.measurement_map, instance.b, config=get_profile("fpca-easy"))
    assert rel_error(report.X_opt, instance.M) <= 1e-3


def test_column_sample_defaults():
    assert max_identifiable_rank(40, 40, 800) == 11
    assert default_column_samples(40, 40, 800) == 20
    assert default_column_samples(1, 1, 1) == 1


# ----------------------------------------------------------------------
# Debiasing
# ----------------------------------------------------------------------

def test_nnls_clips_negative_components():
    np.testing.assert_allclose(nnls_projected_gradient(np.eye(2), np.array([1.0, -1.0])), [1.0, 0.0])


def test_debias_restores_true_singular_values():
    M = _low_rank(6, 6, 2, seed=9)
    mask, b = _fully_observed(M)
    _, shrunk = shrink_matrix(M, 0.1)
    np.testing.assert_allclose(debias(shrunk, mask, b), scipy.linalg.svdvals(M)[:2], rtol=1e-8)


def test_debias_of_empty_factors():
    mask = EntryMask.full((2, 2))
    _, empty = shrink_matrix(np.eye(2), 5.0)
    assert debias(empty, mask, np.ones(4)).size == 0


def test_fpc3_debiases_and_recovers():
    M = _low_rank(10, 10, 2, seed=10)
    mask, b = _fully_observed(M)
    report = fpc_solve(mask, b, config=get_profile("fpc3"))
    assert report.debias_count >= 1
    assert rel_error(report.X_opt, M) <= 1e-4


def test_debias_requires_exact_svd():
    with pytest.raises(ValidationError):
        build_config({"debias": True, "svd_mode": SvdMode.APPROXIMATE})


# ----------------------------------------------------------------------
# Bregman y configuración
# ----------------------------------------------------------------------

def test_single_bregman_iteration_equals_fpc():
    instance = gen_instance(20, 20, 1, 200, seed=13)
    config = get_profile("fpc2").with_overrides(bregman_outer=1)
    plain = fpc_solve(instance.measurement_map, instance.b, config=config)
    bregman = bregman_solve(instance.measurement_map, instance.b, config=config)
    np.testing.assert_array_equal(plain.X_opt, bregman.X_opt)
    assert bregman.outer_residuals == (plain.residual_norm,)


def test_bregman_residual_does_not_increase():
    instance = gen_instance(20, 20, 1, 200, seed=14)
    report = bregman_solve(instance.measurement_map, instance.b, config=get_profile("bregman"))
    residuals = report.outer_residuals
    assert len(residuals) == 3
    slack = 1e-8 * max(1.0, np.linalg.norm(instance.b))
    assert all(after <= before + slack for before, after in zip(residuals, residuals[1:]))


def test_bregman_requires_outer_iterations():
    mask = EntryMask.full((2, 2))
    with pytest.raises(ValidationError):
        bregman_solve(mask, np.ones(4), config=get_profile("fpc2"))


def test_profiles_and_overrides():
    with pytest.raises(ValidationError):
        get_profile("nope")
    with pytest.raises(ValidationError):
        build_config({"eta_mu": 1.5})
    config = get_profile("fpca").with_overrides(c_s=7, tau=None)
    assert config.c_s == 7 and config.tau == 1.0
    assert get_profile("fpca").c_s is None


def main():
    """Ejecuta las pruebas de este archivo sin pytest."""
    tests = [(name, func) for name, func in globals().items()
             if name.startswith("test_") and not hasattr(func, "pytestmark")]
    tests.append(("test_scalar_problem_is_soft_thresholding",
                  lambda: test_scalar_problem_is_soft_thresholding(2.0, 1.5)))
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
