"""
Fixed Point Continuation (FPC / FPCA).

Itera X <- S_{tau mu}(X - tau g(X)) para una sucesión decreciente de mu
(mu_{k+1} = max(eta_mu mu_k, mu_bar)), arrancando cada etapa desde el X de
la anterior. Con svd_mode=approximate el shrinkage usa la SVD de tiempo
lineal y el rango k_s se adapta en cada iteración.
"""

import logging
import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..numerics.approx_svd import (
    ApproxSvdConfig,
    RankController,
    column_norm_probabilities,
    expansion_violated,
    linear_time_svd,
    record_step,
    uniform_probabilities,
)
from ..numerics.linalg import SvdFactors, ensure_matrix, full_svd, shrink_factors, spectral_norm
from ..numerics.operators import MeasurementMap, lipschitz_bound
from ..utils.error_handler import NumericalError, ValidationError
from .config import PROFILES, SamplingScheme, SolverConfig, default_column_samples
from .debias import debias

logger = logging.getLogger(__name__)

# Tolerancia de la norma espectral en la regla de parada sobre g
GTOL_SPECTRAL_TOL = 1e-8
# Incremento relativo del objetivo que cuenta como subida
OBJECTIVE_SLACK = 1e-9

SvdBackend = Callable[[np.ndarray], SvdFactors]


@dataclass(frozen=True, eq=False)
class IterationState:
    """Estado tras una iteración interna, entregado a on_iteration."""
    stage: int
    iteration: int
    mu: float
    X: np.ndarray
    factors: SvdFactors
    step_norm: float
    objective: float
    ks: Optional[int] = None
    debiased: bool = False


@dataclass(frozen=True, eq=False)
class StageSummary:
    """Cierre de una etapa de continuación."""
    stage: int
    mu: float
    iterations: int
    exit_reason: str
    X: np.ndarray


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Resultado inmutable de un solve."""
    X_opt: np.ndarray
    final_rank: int
    mu_path: Tuple[float, ...]
    inner_iterations: Tuple[int, ...]
    residual_norm: float
    elapsed_seconds: float
    svd_calls: int
    ks_history: Tuple[int, ...] = ()
    stage_exits: Tuple[str, ...] = ()
    debias_count: int = 0
    outer_residuals: Tuple[float, ...] = ()

    @property
    def total_iterations(self) -> int:
        return int(sum(self.inner_iterations))

    @property
    def hit_inner_max(self) -> bool:
        """True si alguna etapa terminó por I_m sin converger."""
        return "inner_max" in self.stage_exits


class _SvdBackend:
    """SVD exacta o aproximada con el estado de rango de FPCA."""

    def __init__(self, config: SolverConfig, shape: Tuple[int, int], p: int):
        m, n = shape
        self.approximate = config.approximate
        self.calls = 0
        self.ks_history: List[int] = []
        if self.approximate:
            self.c_s = min(config.c_s or default_column_samples(m, n, p), n)
            self.sampling = config.sampling
            self.controller = RankController(
                current_ks=self.c_s, epsilon_ks=config.epsilon_ks, max_ks=self.c_s
            )
            self._rng = np.random.default_rng(config.seed)
            self._uniform = uniform_probabilities(n)

    def __call__(self, Y: np.ndarray) -> SvdFactors:
        self.calls += 1
        if not self.approximate:
            return full_svd(Y)
        ks = self.controller.current_ks
        self.ks_history.append(ks)
        probabilities = (
            column_norm_probabilities(Y) if self.sampling is SamplingScheme.COLUMN_NORM
            else self._uniform
        )
        seed = int(self._rng.integers(0, 2**63 - 1))
        return linear_time_svd(Y, ApproxSvdConfig(self.c_s, ks, probabilities, seed))

    def observe(self, shrunk_sigma: np.ndarray, violated: bool) -> None:
        self.controller = record_step(self.controller.adapt(shrunk_sigma), violated)


def prox_step(X, measurement_map: MeasurementMap, b, tau: float, mu: float,
              svd_backend: SvdBackend = full_svd,
              g: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, SvdFactors]:
    """
    Un paso de punto fijo: Y = X - tau g(X), X_next = S_{tau mu}(Y).

    Args:
        g: gradiente en X si ya se calculó

    Returns:
        (X_next, Y, factores de X_next tras el shrinkage)
    """
    nu = tau * mu
    if not nu > 0 or not np.isfinite(nu):
        raise ValidationError(f"tau * mu debe ser positivo, recibido {nu}", "mu")
    if g is None:
        g = measurement_map.adjoint(measurement_map.apply(X) - b)
    Y = X - tau * g
    try:
        factors = svd_backend(Y)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Fallo de SVD en el paso de shrinkage: {e}", "prox_step")
    X_next, shrunk = shrink_factors(factors, nu)
    return X_next, Y, shrunk


def stopping_x(X_prev, X_next, xtol: float) -> bool:
    """||X_next - X_prev||_F / max(1, ||X_prev||_F) < xtol."""
    X_prev = np.asarray(X_prev, dtype=float)
    X_next = np.asarray(X_next, dtype=float)
    if X_prev.shape != X_next.shape:
        raise ValidationError(f"Formas distintas: {X_prev.shape} vs {X_next.shape}", "X")
    quotient = np.linalg.norm(X_next - X_prev) / max(1.0, float(np.linalg.norm(X_prev)))
    return bool(quotient < xtol)


def stopping_g(factors: SvdFactors, g, mu: float, gtol: float) -> bool:
    """sigma_1(U V^T + g / mu) - 1 < gtol."""
    g = np.asarray(g, dtype=float)
    W = g / mu
    if factors.rank > 0:
        W = W + factors.U @ factors.V.T
    return bool(spectral_norm(W, tol=GTOL_SPECTRAL_TOL) - 1.0 < gtol)


def initial_mu(measurement_map: MeasurementMap, b, config: SolverConfig) -> float:
    """mu_1 = max(eta_mu sigma_1(A^* b), mu_bar)."""
    top = spectral_norm(measurement_map.adjoint(b), tol=GTOL_SPECTRAL_TOL)
    return max(config.eta_mu * top, config.mu_bar)


def objective(mu: float, factors: SvdFactors, residual: np.ndarray) -> float:
    """F_mu(X) = mu ||X||_* + 1/2 ||A(X) - b||^2 con ||X||_* tomado de los factores."""
    return float(mu * np.sum(factors.sigma) + 0.5 * residual @ residual)


def _check_step_size(measurement_map: MeasurementMap, config: SolverConfig) -> None:
    bound = 2.0 / lipschitz_bound(measurement_map)
    if config.tau < bound:
        return
    if config.allow_boundary_tau and config.tau <= bound * (1.0 + 1e-12):
        logger.warning(
            f"⚠️ tau = {config.tau} está en el borde 2/lambda_max = {bound:.6g}; "
            "la convergencia no está garantizada"
        )
        return
    raise ValidationError(
        f"tau = {config.tau} fuera de rango: se requiere tau < 2/lambda_max = {bound:.6g}", "tau"
    )


def _validate_inputs(measurement_map: MeasurementMap, b, shape, X0) -> Tuple[np.ndarray, np.ndarray]:
    if shape is not None and tuple(shape) != measurement_map.shape:
        raise ValidationError(
            f"shape {tuple(shape)} no coincide con el mapa {measurement_map.shape}", "shape"
        )
    b = np.asarray(b, dtype=float)
    if b.shape != (measurement_map.p,):
        raise ValidationError(f"b debe tener longitud {measurement_map.p}, recibido {b.shape}", "b")
    if not np.all(np.isfinite(b)):
        raise ValidationError("b contiene valores NaN/Inf", "b")
    if X0 is None:
        X = np.zeros(measurement_map.shape)
    else:
        X = np.array(ensure_matrix(X0, "X0"))
        if X.shape != measurement_map.shape:
            raise ValidationError(f"X0 tiene forma {X.shape}, se esperaba {measurement_map.shape}", "X0")
    return b, X


def fpc_solve(measurement_map: MeasurementMap, b, shape=None, config: Optional[SolverConfig] = None,
              X0=None,
              on_iteration: Optional[Callable[[IterationState], None]] = None,
              on_stage_end: Optional[Callable[[StageSummary], None]] = None) -> SolveReport:
    """
    Resuelve min mu_bar ||X||_* + 1/2 ||A(X) - b||^2 por continuación.

    Args:
        measurement_map: Mapa A
        b: Mediciones
        shape: (m, n); si se da debe coincidir con el mapa
        config: Parámetros (por defecto el perfil fpc1)
        X0: Punto inicial (por defecto 0)
        on_iteration: Callback por iteración interna
        on_stage_end: Callback al cerrar cada etapa de mu

    Returns:
        SolveReport

    Raises:
        ValidationError: entradas inválidas o tau fuera de rango
        NumericalError: SVD fallida o objetivo creciente durante demasiados pasos
    """
    config = config or PROFILES["fpc1"]
    start = time.perf_counter()
    b, X = _validate_inputs(measurement_map, b, shape, X0)
    shape = measurement_map.shape
    _check_step_size(measurement_map, config)

    if not np.any(b):
        logger.info("b = 0: X = 0 es óptimo, no se itera")
        return SolveReport(
            X_opt=np.zeros(shape), final_rank=0, mu_path=(config.mu_bar,), inner_iterations=(0,),
            residual_norm=0.0, elapsed_seconds=time.perf_counter() - start, svd_calls=0,
            stage_exits=("zero_data",),
        )

    backend = _SvdBackend(config, shape, measurement_map.p)
    inner_max = config.effective_inner_max(shape)
    use_gtol = config.gtol_rule_active(shape)
    tau = config.tau

    residual = measurement_map.apply(X) - b
    g = measurement_map.adjoint(residual)
    factors: Optional[SvdFactors] = None

    mu = initial_mu(measurement_map, b, config)
    mu_path: List[float] = []
    inner_iterations: List[int] = []
    stage_exits: List[str] = []
    debias_count = 0

    logger.debug(
        f"FPC {shape[0]}x{shape[1]}, p={measurement_map.p}, mu_1={mu:.3e}, "
        f"modo={config.svd_mode.value}, I_m={inner_max}"
    )

    stage = 0
    while True:
        stage += 1
        exit_reason = "inner_max"
        debiased_in_stage = False
        increases = 0
        prev_objective: Optional[float] = None
        Y_prev: Optional[np.ndarray] = None
        iterations = 0

        for iteration in range(1, inner_max + 1):
            iterations = iteration
            X_next, Y, next_factors = prox_step(X, measurement_map, b, tau, mu, backend, g=g)
            step = float(np.linalg.norm(X_next - X))

            if backend.approximate:
                violated = Y_prev is not None and expansion_violated(
                    step, float(np.linalg.norm(Y - Y_prev))
                )
                backend.observe(next_factors.sigma, violated)
            Y_prev = Y

            residual = measurement_map.apply(X_next) - b
            g_next = measurement_map.adjoint(residual)

            debiased = False
            if config.debias and not debiased_in_stage and next_factors.rank > 0:
                g_norm = spectral_norm(g_next, tol=GTOL_SPECTRAL_TOL)
                if g_norm > config.debias_trigger * step:
                    sigma = debias(next_factors, measurement_map, b)
                    keep = sigma > 0
                    next_factors = SvdFactors(
                        next_factors.U[:, keep], sigma[keep], next_factors.V[:, keep]
                    )
                    X_next = next_factors.reconstruct()
                    residual = measurement_map.apply(X_next) - b
                    g_next = measurement_map.adjoint(residual)
                    debiased = debiased_in_stage = True
                    debias_count += 1
                    logger.debug(f"Debiasing en etapa {stage}, iteración {iteration}: rango {next_factors.rank}")

            current_objective = objective(mu, next_factors, residual)
            if not backend.approximate and not debiased:
                if prev_objective is not None and current_objective > prev_objective + OBJECTIVE_SLACK * max(1.0, abs(prev_objective)):
                    increases += 1
                    if increases > config.objective_abort_window:
                        raise NumericalError(
                            f"El objetivo creció durante {increases} pasos consecutivos "
                            f"(etapa {stage}, mu={mu:.3e})",
                            "fpc_solve",
                        )
                else:
                    increases = 0
            prev_objective = current_objective

            converged = not debiased and stopping_x(X, X_next, config.xtol)
            X, g, factors = X_next, g_next, next_factors

            if on_iteration is not None:
                on_iteration(IterationState(
                    stage=stage, iteration=iteration, mu=mu, X=X, factors=factors, step_norm=step,
                    objective=current_objective,
                    ks=backend.ks_history[-1] if backend.approximate else None,
                    debiased=debiased,
                ))

            if converged and (not use_gtol or stopping_g(factors, g, mu, config.gtol)):
                exit_reason = "xtol+gtol" if use_gtol else "xtol"
                break

        mu_path.append(mu)
        inner_iterations.append(iterations)
        stage_exits.append(exit_reason)
        logger.debug(
            f"Etapa {stage}: mu={mu:.3e}, {iterations} iteraciones, salida={exit_reason}, "
            f"rango={factors.rank if factors is not None else 0}"
        )
        if on_stage_end is not None:
            on_stage_end(StageSummary(stage, mu, iterations, exit_reason, X))

        if mu <= config.mu_bar:
            break
        mu = max(mu * config.eta_mu, config.mu_bar)

    elapsed = time.perf_counter() - start
    final_rank = factors.rank if factors is not None else 0
    report = SolveReport(
        X_opt=X,
        final_rank=final_rank,
        mu_path=tuple(mu_path),
        inner_iterations=tuple(inner_iterations),
        residual_norm=float(np.linalg.norm(residual)),
        elapsed_seconds=elapsed,
        svd_calls=backend.calls,
        ks_history=tuple(backend.ks_history),
        stage_exits=tuple(stage_exits),
        debias_count=debias_count,
    )
    logger.info(
        f"✅ FPC terminó: rango {final_rank}, {len(mu_path)} etapas, "
        f"{report.total_iterations} iteraciones, {elapsed:.2f}s"
    )
    return report
