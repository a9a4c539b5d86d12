"""
Iteración de Bregman: b^{k+1} = b + (b^k - A(X^k)) y un solve FPC con
arranque en caliente por iteración externa.
"""

import logging
import time
from dataclasses import replace
from typing import Callable, List, Optional

import numpy as np

from ..numerics.operators import MeasurementMap
from ..utils.error_handler import ValidationError
from .config import PROFILES, SolverConfig
from .fpc import SolveReport, fpc_solve

logger = logging.getLogger(__name__)


def bregman_solve(measurement_map: MeasurementMap, b, shape=None, config: Optional[SolverConfig] = None,
                  on_outer: Optional[Callable[[int, SolveReport], None]] = None) -> SolveReport:
    """
    Bregman con subproblemas FPC.

    Cada subproblema corre la continuación completa hasta mu_bar partiendo
    del X anterior. El informe devuelto es el del último subproblema con
    svd_calls, stage_exits y debias_count acumulados y outer_residuals[k] = ||A(X^{k+1}) - b||_2.
    """
    config = config or PROFILES["bregman"]
    if config.bregman_outer < 1:
        raise ValidationError(
            f"bregman_outer debe ser >= 1, recibido {config.bregman_outer}", "bregman_outer"
        )
    b = np.asarray(b, dtype=float)
    start = time.perf_counter()

    X = np.zeros(measurement_map.shape)
    b_k = np.zeros_like(b)
    residuals: List[float] = []
    svd_calls = 0
    stage_exits: List[str] = []
    debias_count = 0
    report: Optional[SolveReport] = None

    for k in range(config.bregman_outer):
        b_k = b + (b_k - measurement_map.apply(X))
        report = fpc_solve(measurement_map, b_k, shape, config, X0=X)
        X = report.X_opt
        residual = float(np.linalg.norm(measurement_map.apply(X) - b))
        residuals.append(residual)
        svd_calls += report.svd_calls
        stage_exits.extend(report.stage_exits)
        debias_count += report.debias_count
        logger.info(f"🔁 Bregman {k + 1}/{config.bregman_outer}: ||A(X) - b|| = {residual:.3e}")
        if on_outer is not None:
            on_outer(k + 1, report)

    return replace(
        report,
        residual_norm=residuals[-1],
        elapsed_seconds=time.perf_counter() - start,
        svd_calls=svd_calls,
        stage_exits=tuple(stage_exits),
        debias_count=debias_count,
        outer_residuals=tuple(residuals),
    )
