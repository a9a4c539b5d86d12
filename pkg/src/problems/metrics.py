"""
Métricas de recuperación: error relativo, razones de muestreo/libertad y NMAE.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..solvers.config import max_identifiable_rank
from ..utils.error_handler import ValidationError

# Una instancia se considera recuperada si rel.err < 1e-3
RECOVERY_THRESHOLD = 1e-3


def rel_error(X, M) -> float:
    """||X - M||_F / ||M||_F."""
    X = np.asarray(X, dtype=float)
    M = np.asarray(M, dtype=float)
    if X.shape != M.shape:
        raise ValidationError(f"Formas distintas: {X.shape} vs {M.shape}", "X")
    denominator = float(np.linalg.norm(M))
    if denominator == 0.0:
        raise ValidationError("rel_error no está definido para M = 0", "M")
    return float(np.linalg.norm(X - M)) / denominator


def is_recovered(relative_error: float) -> bool:
    return relative_error < RECOVERY_THRESHOLD


@dataclass(frozen=True)
class FreedomStats:
    """SR = p/(mn), FR = r(m+n-r)/p, r_m = mayor rango con FR <= 1."""
    SR: float
    FR: float
    r_m: int


def freedom_stats(m: int, n: int, p: int, r: int) -> FreedomStats:
    if p < 1:
        raise ValidationError(f"p debe ser >= 1, recibido {p}", "p")
    if m < 1 or n < 1 or r < 0:
        raise ValidationError(f"Dimensiones inválidas: m={m}, n={n}, r={r}", "shape")
    return FreedomStats(
        SR=p / (m * n),
        FR=r * (m + n - r) / p,
        r_m=max_identifiable_rank(m, n, p),
    )


def nmae(predicted: Sequence[Sequence[float]], withheld: Sequence[Sequence[float]],
         r_min: float, r_max: float) -> float:
    """
    Error absoluto medio normalizado sobre los ratings retenidos.

    predicted[u] y withheld[u] son los ratings retenidos del usuario u
    (dos por usuario en el protocolo estándar) y su predicción.
    NMAE = MAE / (r_max - r_min).
    """
    if not r_max > r_min:
        raise ValidationError(f"Se requiere r_max > r_min, recibido [{r_min}, {r_max}]", "r_max")
    if len(predicted) != len(withheld):
        raise ValidationError(
            f"predicted tiene {len(predicted)} usuarios y withheld {len(withheld)}", "predicted"
        )
    if len(withheld) == 0:
        raise ValidationError("No hay ratings retenidos", "withheld")

    errors = []
    for user, (guess, truth) in enumerate(zip(predicted, withheld)):
        guess = np.atleast_1d(np.asarray(guess, dtype=float))
        truth = np.atleast_1d(np.asarray(truth, dtype=float))
        if guess.shape != truth.shape:
            raise ValidationError(
                f"Usuario {user}: {guess.size} predicciones para {truth.size} ratings retenidos",
                "predicted",
            )
        errors.append(np.abs(guess - truth))
    mae = float(np.mean(np.concatenate(errors)))
    return mae / (r_max - r_min)
