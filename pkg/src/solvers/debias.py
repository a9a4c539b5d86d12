"""
Debiasing: reajusta los valores singulares con U y V fijos resolviendo
min_{sigma >= 0} ||A(U Diag(sigma) V^T) - b||_2.
"""

import logging

import numpy as np
import scipy.linalg

from ..numerics.linalg import SvdFactors
from ..numerics.operators import MeasurementMap

logger = logging.getLogger(__name__)

NNLS_MAX_ITER = 500
NNLS_TOL = 1e-10


def nnls_projected_gradient(B: np.ndarray, b: np.ndarray, max_iter: int = NNLS_MAX_ITER,
                            tol: float = NNLS_TOL) -> np.ndarray:
    """
    min_{x >= 0} ||B x - b||_2 por gradiente proyectado con paso 1/lambda_max(B^T B).

    Arranca desde la solución de mínimos cuadrados sin restricciones
    recortada a x >= 0.
    """
    G = B.T @ B
    c = B.T @ b
    r = G.shape[0]
    lam = float(scipy.linalg.eigvalsh(G, subset_by_index=[r - 1, r - 1])[0]) if r > 0 else 0.0
    if lam <= 0.0:
        return np.zeros(r)

    x0, *_ = np.linalg.lstsq(B, b, rcond=None)
    x = np.maximum(x0, 0.0)
    step = 1.0 / lam
    for iteration in range(max_iter):
        x_new = np.maximum(x - step * (G @ x - c), 0.0)
        delta = float(np.linalg.norm(x_new - x))
        x = x_new
        if delta <= tol * max(1.0, float(np.linalg.norm(x))):
            break
    else:
        logger.debug(f"NNLS alcanzó {max_iter} iteraciones sin converger")
    return x


def debias(factors: SvdFactors, measurement_map: MeasurementMap, b) -> np.ndarray:
    """Valores singulares no negativos que mejor ajustan b con los vectores singulares congelados."""
    if factors.rank == 0:
        return np.zeros(0)
    B = measurement_map.rank_one_columns(factors.U, factors.V)
    return nnls_projected_gradient(B, np.asarray(b, dtype=float))
