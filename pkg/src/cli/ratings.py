"""
Evaluación NMAE sobre una matriz de ratings.

Archivo CSV con filas (usuario, ítem, rating); una cabecera opcional se
detecta si el rating de la primera fila no es numérico. Usuarios e ítems
pueden ser etiquetas arbitrarias y se indexan por orden de aparición.
"""

import csv
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..numerics.linalg import full_svd
from ..numerics.operators import EntryMask
from ..problems.benchmark import solve_with_profile
from ..problems.metrics import nmae
from ..solvers.config import SolverConfig, get_profile
from ..utils.error_handler import InputFormatError, ValidationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class RatingsMatrix:
    """Ratings observados de un archivo, en orden de archivo."""
    users: Tuple[str, ...]
    items: Tuple[str, ...]
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.users), len(self.items))


@dataclass(frozen=True)
class NmaeReport:
    nmae: float
    mae: float
    users_evaluated: int
    users_excluded: int
    withheld: int
    observed: int
    shape: Tuple[int, int]
    rank: int
    sigma_max: float
    sigma_min: float
    elapsed_seconds: float


def load_ratings(path: PathLike, r_min: float, r_max: float) -> RatingsMatrix:
    """
    Lee el CSV de ratings.

    Raises:
        InputFormatError: fila mal formada, rating fuera de [r_min, r_max] o par repetido
    """
    user_index: Dict[str, int] = {}
    item_index: Dict[str, int] = {}
    rows: List[int] = []
    cols: List[int] = []
    values: List[float] = []
    seen: Dict[Tuple[int, int], int] = {}

    with open(path, 'r', encoding='utf-8', newline='') as handle:
        for number, fields in enumerate(csv.reader(handle), start=1):
            if not fields or fields[0].startswith('#'):
                continue
            if len(fields) != 3:
                raise InputFormatError(f"se esperaban 3 campos (usuario, ítem, rating), hay {len(fields)}",
                                       str(path), number)
            user, item, text = (field.strip() for field in fields)
            try:
                rating = float(text)
            except ValueError:
                if number == 1:
                    continue
                raise InputFormatError(f"rating no numérico '{text}'", str(path), number)
            if not r_min <= rating <= r_max:
                raise InputFormatError(f"rating {rating} fuera de [{r_min}, {r_max}]", str(path), number)

            i = user_index.setdefault(user, len(user_index))
            j = item_index.setdefault(item, len(item_index))
            if (i, j) in seen:
                raise InputFormatError(
                    f"rating repetido de '{user}' para '{item}' (ya en la línea {seen[(i, j)]})",
                    str(path), number,
                )
            seen[(i, j)] = number
            rows.append(i)
            cols.append(j)
            values.append(rating)

    if not values:
        raise InputFormatError("el archivo no contiene ratings", str(path))
    return RatingsMatrix(
        users=tuple(user_index), items=tuple(item_index),
        rows=np.array(rows, dtype=np.intp), cols=np.array(cols, dtype=np.intp), values=np.array(values),
    )


def split_holdout(ratings: RatingsMatrix, holdout_per_user: int,
                  seed: int) -> Tuple[np.ndarray, Dict[int, np.ndarray], int]:
    """
    Retiene holdout_per_user ratings por usuario, elegidos uniformemente.

    Los usuarios con menos de holdout_per_user + 1 ratings no aportan
    ratings retenidos.

    Returns:
        (máscara booleana de ratings conservados, posiciones retenidas por usuario, usuarios excluidos)
    """
    if holdout_per_user < 1:
        raise ValidationError(f"holdout_per_user debe ser >= 1, recibido {holdout_per_user}", "holdout_per_user")
    rng = np.random.Generator(np.random.PCG64(seed))
    keep = np.ones(ratings.values.size, dtype=bool)
    withheld: Dict[int, np.ndarray] = {}
    excluded = 0
    for user in range(len(ratings.users)):
        positions = np.flatnonzero(ratings.rows == user)
        if positions.size < holdout_per_user + 1:
            excluded += 1
            logger.debug(f"Usuario '{ratings.users[user]}' con {positions.size} ratings, excluido del holdout")
            continue
        chosen = np.sort(rng.choice(positions, size=holdout_per_user, replace=False))
        keep[chosen] = False
        withheld[user] = chosen
    if excluded:
        logger.warning(f"⚠️ {excluded} usuarios con menos de {holdout_per_user + 1} ratings excluidos del holdout")
    return keep, withheld, excluded


def eval_nmae(ratings_path: PathLike, holdout_per_user: int = 2, seed: int = 0, profile: str = "fpca",
              r_min: float = -10.0, r_max: float = 10.0,
              config: Optional[SolverConfig] = None) -> NmaeReport:
    """Completa la matriz sin los ratings retenidos y calcula el NMAE sobre ellos."""
    config = config or get_profile(profile)
    ratings = load_ratings(ratings_path, r_min, r_max)
    keep, withheld, excluded = split_holdout(ratings, holdout_per_user, seed)
    if not withheld:
        raise ValidationError("Ningún usuario tiene ratings suficientes para el holdout", "ratings")

    start = time.perf_counter()
    measurement_map = EntryMask(ratings.shape, ratings.rows[keep], ratings.cols[keep])
    report = solve_with_profile(measurement_map, ratings.values[keep], config)
    elapsed = time.perf_counter() - start
    X = report.X_opt

    predicted = [X[ratings.rows[positions], ratings.cols[positions]] for positions in withheld.values()]
    truth = [ratings.values[positions] for positions in withheld.values()]
    score = nmae(predicted, truth, r_min, r_max)

    factors = full_svd(X) if np.any(X) else None
    result = NmaeReport(
        nmae=score,
        mae=score * (r_max - r_min),
        users_evaluated=len(withheld),
        users_excluded=excluded,
        withheld=int(sum(positions.size for positions in withheld.values())),
        observed=int(keep.sum()),
        shape=ratings.shape,
        rank=factors.rank if factors is not None else 0,
        sigma_max=float(factors.sigma[0]) if factors is not None else 0.0,
        sigma_min=float(factors.sigma[-1]) if factors is not None else 0.0,
        elapsed_seconds=elapsed,
    )
    logger.info(f"✅ NMAE = {score:.4f} ({result.users_evaluated} usuarios, rango {result.rank})")
    return result
