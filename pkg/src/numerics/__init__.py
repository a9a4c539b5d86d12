"""Núcleo numérico: álgebra lineal densa, mapas de medición y SVD aproximada."""

from .linalg import (
    SvdFactors,
    ensure_matrix,
    full_svd,
    nuclear_norm,
    shrink_factors,
    shrink_matrix,
    shrink_vector,
    spectral_norm,
)
from .operators import (
    EntryMask,
    ExplicitAffine,
    MeasurementMap,
    adjoint,
    apply,
    gradient,
    lipschitz_bound,
)
from .approx_svd import (
    ApproxSvdConfig,
    RankController,
    adaptive_rank,
    column_norm_probabilities,
    linear_time_svd,
    record_step,
    uniform_probabilities,
)

__all__ = [
    # Álgebra lineal
    'SvdFactors', 'ensure_matrix', 'full_svd', 'nuclear_norm',
    'shrink_factors', 'shrink_matrix', 'shrink_vector', 'spectral_norm',

    # Mapas de medición
    'EntryMask', 'ExplicitAffine', 'MeasurementMap',
    'adjoint', 'apply', 'gradient', 'lipschitz_bound',

    # SVD aproximada
    'ApproxSvdConfig', 'RankController', 'adaptive_rank',
    'column_norm_probabilities', 'linear_time_svd', 'record_step',
    'uniform_probabilities',
]
