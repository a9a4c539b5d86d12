"""Solvers FPC / FPCA / Bregman y sus perfiles de configuración."""

from .config import (
    PROFILES,
    SamplingScheme,
    SolverConfig,
    SvdMode,
    build_config,
    default_column_samples,
    get_profile,
    max_identifiable_rank,
)
from .debias import debias
from .fpc import (
    IterationState,
    SolveReport,
    StageSummary,
    fpc_solve,
    prox_step,
    stopping_g,
    stopping_x,
)
from .bregman import bregman_solve

__all__ = [
    # Configuración
    'PROFILES', 'SamplingScheme', 'SolverConfig', 'SvdMode', 'build_config',
    'default_column_samples', 'get_profile', 'max_identifiable_rank',

    # Solvers
    'IterationState', 'SolveReport', 'StageSummary', 'bregman_solve', 'debias',
    'fpc_solve', 'prox_step', 'stopping_g', 'stopping_x',
]
