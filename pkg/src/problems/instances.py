"""
Generación de instancias aleatorias.

M = M_L M_R^T con factores gaussianos estándar y Omega de p entradas
distintas muestreadas uniformemente sin reemplazo. Todo sale de un PCG64
sembrado, así que la misma semilla reproduce la misma instancia.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from ..numerics.operators import EntryMask, ExplicitAffine, MeasurementMap
from ..utils.error_handler import NumericalError, ValidationError

logger = logging.getLogger(__name__)

# sigma_i > GENERATED_RANK_TOL * sigma_1 cuenta para el rango de M
GENERATED_RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Matriz de referencia M, mapa de medición y b = A(M)."""
    M: np.ndarray
    measurement_map: MeasurementMap
    b: np.ndarray
    r: int
    seed: int

    @property
    def shape(self) -> Tuple[int, int]:
        return self.M.shape

    @property
    def p(self) -> int:
        return int(self.b.shape[0])

    @property
    def omega(self) -> Optional[np.ndarray]:
        """Pares (i, j) observados; None si el mapa no es de entradas."""
        if isinstance(self.measurement_map, EntryMask):
            return self.measurement_map.pairs
        return None


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check_dimensions(m: int, n: int, r: int, p: int) -> None:
    if m < 1 or n < 1:
        raise ValidationError(f"Dimensiones inválidas: {m}x{n}", "shape")
    if not 1 <= r <= min(m, n):
        raise ValidationError(f"El rango debe estar en [1, {min(m, n)}], recibido {r}", "r")
    if not 1 <= p <= m * n:
        raise ValidationError(f"p debe estar en [1, {m * n}], recibido {p}", "p")


def low_rank_matrix(m: int, n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """M_L M_R^T con entradas N(0, 1) y verificación del rango."""
    M = rng.standard_normal((m, r)) @ rng.standard_normal((n, r)).T
    sigma = scipy.linalg.svdvals(M, check_finite=False)
    numeric_rank = int(np.count_nonzero(sigma > GENERATED_RANK_TOL * sigma[0]))
    if numeric_rank != r:
        raise NumericalError(
            f"La matriz generada tiene rango {numeric_rank}, se pidió {r}", "gen_instance"
        )
    return M


def gen_instance(m: int, n: int, r: int, p: int, seed: int) -> ProblemInstance:
    """Instancia de completación de matrices de rango r con p entradas observadas."""
    _check_dimensions(m, n, r, p)
    rng = make_rng(seed)
    M = low_rank_matrix(m, n, r, rng)
    linear = np.sort(rng.choice(m * n, size=p, replace=False))
    rows, cols = np.divmod(linear, n)
    mask = EntryMask((m, n), rows, cols)
    b = M[mask.rows, mask.cols].copy()
    logger.debug(f"Instancia {m}x{n}, r={r}, p={p}, seed={seed}")
    return ProblemInstance(M=M, measurement_map=mask, b=b, r=r, seed=seed)


def gen_gaussian_instance(m: int, n: int, r: int, p: int, seed: int) -> ProblemInstance:
    """Instancia con mediciones afines gaussianas: A tiene entradas N(0, 1/p)."""
    _check_dimensions(m, n, r, p)
    rng = make_rng(seed)
    M = low_rank_matrix(m, n, r, rng)
    coefficients = rng.normal(0.0, 1.0 / np.sqrt(p), size=(p, m * n))
    measurement_map = ExplicitAffine((m, n), coefficients)
    return ProblemInstance(M=M, measurement_map=measurement_map, b=measurement_map.apply(M), r=r, seed=seed)
