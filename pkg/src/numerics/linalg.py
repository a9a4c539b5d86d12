"""
Primitivas de matrices densas: SVD exacta, norma espectral y operadores de shrinkage.
Son el núcleo computacional del método de punto fijo.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg

from ..utils.error_handler import NumericalError, ValidationError

logger = logging.getLogger(__name__)

# Umbral relativo de rango numérico: sigma_i <= RANK_TOL * sigma_1 se descarta
RANK_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SvdFactors:
    """
    Factorización A ~ U Diag(sigma) V^T.

    Con approximate=False las columnas de U y V son ortonormales. Con
    approximate=True sólo U lo es (V = A^T U Diag(1/sigma) tal como sale
    del muestreo de columnas).
    """
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    approximate: bool = False

    @property
    def rank(self) -> int:
        return int(self.sigma.shape[0])

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.U.shape[0], self.V.shape[0])

    def reconstruct(self) -> np.ndarray:
        """Devuelve U Diag(sigma) V^T como matriz densa."""
        if self.rank == 0:
            return np.zeros(self.shape)
        return (self.U * self.sigma) @ self.V.T

    @classmethod
    def empty(cls, m: int, n: int, approximate: bool = False) -> "SvdFactors":
        return cls(np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0)), approximate)


def ensure_matrix(A, name: str = "A") -> np.ndarray:
    """
    Valida y convierte a matriz densa float64.

    Raises:
        ValidationError: si no es 2-D, está vacía o tiene valores no finitos
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise ValidationError(f"{name} debe ser una matriz 2-D, recibido ndim={A.ndim}", name)
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValidationError(f"{name} no puede estar vacía: shape={A.shape}", name)
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contiene valores NaN/Inf", name)
    return A


def full_svd(A) -> SvdFactors:
    """
    SVD exacta (thin) con truncamiento de los valores singulares nulos.

    Se conservan los sigma_i > 1e-12 * sigma_1; una matriz nula devuelve
    una factorización vacía.
    """
    A = ensure_matrix(A)
    m, n = A.shape
    try:
        U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver='gesdd', check_finite=False)
    except np.linalg.LinAlgError:
        logger.debug("gesdd no convergió, reintentando con gesvd")
        try:
            U, s, Vt = scipy.linalg.svd(A, full_matrices=False, lapack_driver='gesvd', check_finite=False)
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"SVD no convergió para matriz {m}x{n}: {e}", "full_svd")

    if s.size == 0 or s[0] == 0.0:
        return SvdFactors.empty(m, n)
    k = int(np.count_nonzero(s > RANK_TOL * s[0]))
    return SvdFactors(U[:, :k], s[:k], Vt[:k].T, approximate=False)


def shrink_vector(x, nu: float) -> np.ndarray:
    """
    Shrinkage no negativo s_nu(x)_i = x_i - nu si x_i - nu > 0, si no 0.

    Los empates x_i = nu se anulan.
    """
    x = np.asarray(x, dtype=float)
    if nu <= 0 or not np.isfinite(nu):
        raise ValidationError(f"nu debe ser positivo y finito, recibido {nu}", "nu")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValidationError("shrink_vector requiere componentes finitas y no negativas", "x")
    shifted = x - nu
    return np.where(shifted > 0, shifted, 0.0)


def shrink_factors(factors: SvdFactors, nu: float) -> Tuple[np.ndarray, SvdFactors]:
    """
    Aplica s_nu a los valores singulares de una factorización ya calculada.

    Returns:
        (X, factores de X sin las columnas de valor singular nulo)
    """
    shrunk = shrink_vector(factors.sigma, nu)
    keep = shrunk > 0
    result = SvdFactors(
        factors.U[:, keep], shrunk[keep], factors.V[:, keep], factors.approximate
    )
    return result.reconstruct(), result


def shrink_matrix(Y, nu: float) -> Tuple[np.ndarray, SvdFactors]:
    """Operador de shrinkage matricial S_nu(Y) = U Diag(s_nu(gamma)) V^T."""
    if nu <= 0 or not np.isfinite(nu):
        raise ValidationError(f"nu debe ser positivo y finito, recibido {nu}", "nu")
    return shrink_factors(full_svd(Y), nu)


def nuclear_norm(A) -> float:
    """Suma de los valores singulares."""
    return float(np.sum(scipy.linalg.svdvals(ensure_matrix(A), check_finite=False)))


def spectral_norm(A, tol: float = 1e-8, max_iter: int = 5000) -> float:
    """
    sigma_1(A) por iteración de potencia sobre A^T A.

    El vector inicial es el de unos normalizado. Se detiene cuando el
    residuo ||A^T A v - lambda v|| <= tol * lambda, con lambda el cociente
    de Rayleigh. Si el iterado colapsa
    (inicio ortogonal al subespacio dominante) se reinicia desde la
    columna canónica de mayor norma de A.
    """
    A = ensure_matrix(A)
    if tol <= 0:
        raise ValidationError(f"tol debe ser positivo, recibido {tol}", "tol")
    n = A.shape[1]
    scale = float(np.max(np.abs(A)))
    if scale == 0.0:
        return 0.0

    v = np.ones(n) / np.sqrt(n)
    restarted = False
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w <= 1e-14 * scale * scale:
            if restarted:
                return 0.0
            v = np.zeros(n)
            v[int(np.argmax(np.sum(A * A, axis=0)))] = 1.0
            restarted = True
            continue
        # v unitario: lambda = v^T A^T A v
        lam = float(v @ w)
        residual = float(np.linalg.norm(w - lam * v))
        v = w / norm_w
        if residual <= tol * lam:
            return float(np.linalg.norm(A @ v))

    logger.debug(f"spectral_norm alcanzó max_iter={max_iter} sin converger a tol={tol}")
    return float(np.linalg.norm(A @ v))
