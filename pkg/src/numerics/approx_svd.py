"""
SVD aproximada de tiempo lineal por muestreo Monte Carlo de columnas y la
política adaptativa de rango que convierte FPC en FPCA.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from ..utils.error_handler import ValidationError
from .linalg import RANK_TOL, SvdFactors, ensure_matrix

logger = logging.getLogger(__name__)

VIOLATION_LIMIT = 10
# Holgura relativa para declarar violada la no expansividad de S_nu
VIOLATION_SLACK = 1e-10


def uniform_probabilities(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def column_norm_probabilities(A: np.ndarray) -> np.ndarray:
    """p_i = ||A^{(i)}||^2 / ||A||_F^2; uniforme si A es nula."""
    norms = np.sum(A * A, axis=0)
    total = norms.sum()
    if total == 0.0:
        return uniform_probabilities(A.shape[1])
    return norms / total


@dataclass(frozen=True, eq=False)
class ApproxSvdConfig:
    """Parámetros del muestreo: 1 <= k_s <= c_s <= n, probabilidades que suman 1."""
    c_s: int
    k_s: int
    probabilities: np.ndarray
    seed: int = 0

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, 'probabilities', probabilities)
        n = probabilities.shape[0] if probabilities.ndim == 1 else -1
        if n < 1:
            raise ValidationError("probabilities debe ser un vector no vacío", "probabilities")
        if not (1 <= self.k_s <= self.c_s <= n):
            raise ValidationError(
                f"Se requiere 1 <= k_s <= c_s <= n, recibido k_s={self.k_s}, c_s={self.c_s}, n={n}",
                "c_s",
            )
        if np.any(probabilities < 0) or abs(probabilities.sum() - 1.0) > 1e-12:
            raise ValidationError("Las probabilidades deben ser no negativas y sumar 1", "probabilities")

    @classmethod
    def uniform(cls, n: int, c_s: int, k_s: int, seed: int = 0) -> "ApproxSvdConfig":
        return cls(c_s=c_s, k_s=k_s, probabilities=uniform_probabilities(n), seed=seed)


def linear_time_svd(A, cfg: ApproxSvdConfig) -> SvdFactors:
    """
    SVD aproximada de rango k_s.

    Muestrea c_s columnas con reemplazo según cfg.probabilities, forma
    C = [A^{(i_t)} / sqrt(c_s p_{i_t})], descompone C^T C y devuelve
    U = H_k (h^t = C y^t / sigma_t(C)), sigma_t(C) y V = A^T H_k Diag(1/sigma).
    """
    A = ensure_matrix(A)
    m, n = A.shape
    if cfg.probabilities.shape[0] != n:
        raise ValidationError(
            f"Hay {cfg.probabilities.shape[0]} probabilidades para una matriz de {n} columnas",
            "probabilities",
        )

    rng = np.random.default_rng(cfg.seed)
    picks = rng.choice(n, size=cfg.c_s, replace=True, p=cfg.probabilities)
    C = A[:, picks] / np.sqrt(cfg.c_s * cfg.probabilities[picks])

    # C^T C = sum sigma_t^2 y^t y^t^T y h^t = C y^t / sigma_t es el vector
    # singular izquierdo t de C; la SVD de C da ambos sin elevar al cuadrado
    # el número de condición
    H_all, sigma, _ = scipy.linalg.svd(C, full_matrices=False, check_finite=False)
    sigma = sigma[: cfg.k_s]

    if sigma.size == 0 or sigma[0] == 0.0:
        logger.warning("⚠️ linear_time_svd: las columnas muestreadas son nulas, factorización vacía")
        return SvdFactors.empty(m, n, approximate=True)

    k_eff = int(np.count_nonzero(sigma > RANK_TOL * sigma[0]))
    sigma = sigma[:k_eff]
    H = H_all[:, :k_eff]
    V = (A.T @ H) / sigma
    return SvdFactors(H, sigma, V, approximate=True)


def adaptive_rank(prev_shrunk_sigma: Sequence[float], epsilon_ks: float) -> int:
    """Número de componentes de s_{k-1} no menores que epsilon_ks * max(s_{k-1}); al menos 1."""
    s = np.asarray(prev_shrunk_sigma, dtype=float)
    if s.size == 0:
        return 1
    top = float(s.max())
    if top <= 0.0:
        return 1
    return max(1, int(np.count_nonzero(s >= epsilon_ks * top)))


@dataclass(frozen=True)
class RankController:
    """Estado del rango k_s dentro de un solve FPCA."""
    current_ks: int
    epsilon_ks: float = 1e-2
    violation_count: int = 0
    violation_limit: int = VIOLATION_LIMIT
    max_ks: Optional[int] = None
    increments: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.current_ks < 1:
            raise ValidationError(f"k_s debe ser >= 1, recibido {self.current_ks}", "current_ks")

    def _clamp(self, ks: int) -> int:
        ks = max(1, ks)
        return min(ks, self.max_ks) if self.max_ks is not None else ks

    def adapt(self, shrunk_sigma: Sequence[float]) -> "RankController":
        """Fija k_s con la regla adaptativa sobre los valores singulares encogidos."""
        return replace(self, current_ks=self._clamp(adaptive_rank(shrunk_sigma, self.epsilon_ks)))


def record_step(ctrl: RankController, expansion_violated: bool) -> RankController:
    """
    Cuenta una violación de no expansividad; al llegar al límite k_s crece
    en 1 (sin superar max_ks) y el contador vuelve a 0.
    """
    if not expansion_violated:
        return ctrl
    count = ctrl.violation_count + 1
    if count >= ctrl.violation_limit:
        new_ks = ctrl._clamp(ctrl.current_ks + 1)
        logger.debug(f"FPCA: {count} violaciones, k_s {ctrl.current_ks} -> {new_ks}")
        return replace(ctrl, current_ks=new_ks, violation_count=0, increments=ctrl.increments + 1)
    return replace(ctrl, violation_count=count)


def expansion_violated(step_x: float, step_y: float) -> bool:
    """||S(Y^k) - S(Y^{k-1})||_F > ||Y^k - Y^{k-1}||_F (1 + 1e-10)."""
    return step_x > step_y * (1.0 + VIOLATION_SLACK)
