"""
Configuración del solver y perfiles con nombre.

Valores por defecto: mu_bar = 1e-8, eta_mu = 1/4, tau = 1, xtol = 1e-10,
gtol = 1e-4, I_m = 500, epsilon_ks = 1e-2, c_s = 2 r_m - 2, p_i = 1/n.
"""

import logging
import math
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from ..utils.error_handler import ValidationError

logger = logging.getLogger(__name__)

# Tamaño máximo (max(m, n)) en el que se evalúa la regla de parada sobre g
GTOL_RULE_MAX_DIM = 200
# Tamaño a partir del cual FPCA usa inner_max_large
LARGE_PROBLEM_DIM = 1000


class SvdMode(str, Enum):
    """Backend de SVD del paso de shrinkage"""
    EXACT = "exact"
    APPROXIMATE = "approximate"


class SamplingScheme(str, Enum):
    """Probabilidades de muestreo de columnas de la SVD aproximada"""
    UNIFORM = "uniform"
    COLUMN_NORM = "column_norm"


class SolverConfig(BaseModel):
    """Parámetros de FPC / FPCA / Bregman."""
    model_config = ConfigDict(frozen=True, extra='forbid', use_enum_values=False)

    mu_bar: float = Field(1e-8, gt=0)
    eta_mu: float = Field(0.25, gt=0, lt=1)
    tau: float = Field(1.0, gt=0)
    xtol: float = Field(1e-10, gt=0)
    gtol: float = Field(1e-4, gt=0)
    inner_max: int = Field(500, ge=1)
    # I_m para problemas con max(m, n) >= 1000; None usa inner_max
    inner_max_large: Optional[int] = Field(None, ge=1)

    svd_mode: SvdMode = SvdMode.EXACT
    use_gtol_rule: bool = False
    epsilon_ks: float = Field(1e-2, gt=0, le=1)
    c_s: Optional[int] = Field(None, ge=1)
    sampling: SamplingScheme = SamplingScheme.UNIFORM
    seed: int = Field(0, ge=0)

    debias: bool = False
    debias_trigger: float = Field(10.0, gt=0)
    bregman_outer: int = Field(0, ge=0)

    # Permite tau = 2 / lambda_max (perfil "easy") con advertencia
    allow_boundary_tau: bool = False
    # Pasos exactos consecutivos con objetivo creciente antes de abortar
    objective_abort_window: int = Field(50, ge=1)

    @model_validator(mode='after')
    def _check_modes(self) -> "SolverConfig":
        if self.debias and self.svd_mode is SvdMode.APPROXIMATE:
            raise ValueError("el debiasing sólo está definido con SVD exacta")
        return self

    @property
    def approximate(self) -> bool:
        return self.svd_mode is SvdMode.APPROXIMATE

    def effective_inner_max(self, shape) -> int:
        if self.inner_max_large is not None and max(shape) >= LARGE_PROBLEM_DIM:
            return self.inner_max_large
        return self.inner_max

    def gtol_rule_active(self, shape) -> bool:
        """La regla sobre g sólo se evalúa con SVD exacta y max(m, n) <= 200."""
        return (self.use_gtol_rule and self.svd_mode is SvdMode.EXACT
                and max(shape) <= GTOL_RULE_MAX_DIM)

    def with_overrides(self, **overrides: Any) -> "SolverConfig":
        """Nueva configuración con los campos no nulos de overrides reemplazados."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        if not updates:
            return self
        return build_config({**self.model_dump(), **updates})


def build_config(values: Dict[str, Any]) -> SolverConfig:
    """Construye un SolverConfig traduciendo los errores de pydantic."""
    try:
        return SolverConfig(**values)
    except PydanticValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get('loc', ())) or None
        raise ValidationError(f"Configuración de solver inválida: {first.get('msg')}", field,
                              details={'errors': len(e.errors())})


PROFILES: Dict[str, SolverConfig] = {
    # SVD exacta, regla de parada sobre X
    "fpc1": SolverConfig(),
    # SVD exacta, reglas sobre X y g
    "fpc2": SolverConfig(use_gtol_rule=True),
    # SVD exacta con debiasing
    "fpc3": SolverConfig(debias=True),
    # SVD aproximada, regla sobre X
    "fpca": SolverConfig(svd_mode=SvdMode.APPROXIMATE, xtol=1e-6, inner_max_large=20),
    # Bregman con subproblemas FPC2
    "bregman": SolverConfig(use_gtol_rule=True, bregman_outer=3),
    # FPCA con parámetros holgados para problemas fáciles
    "fpca-easy": SolverConfig(
        svd_mode=SvdMode.APPROXIMATE, mu_bar=1e-4, xtol=1e-4, tau=2.0, inner_max=10,
        allow_boundary_tau=True,
    ),
}


def get_profile(name: str) -> SolverConfig:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValidationError(
            f"Perfil desconocido '{name}'. Disponibles: {', '.join(PROFILES)}", "profile"
        )


def max_identifiable_rank(m: int, n: int, p: int) -> int:
    """r_m = floor((m + n - sqrt((m + n)^2 - 4p)) / 2), el mayor rango con FR <= 1."""
    if p < 1:
        raise ValidationError(f"p debe ser >= 1, recibido {p}", "p")
    total = m + n
    return int(math.floor((total - math.sqrt(max(total * total - 4 * p, 0))) / 2))


def default_column_samples(m: int, n: int, p: int) -> int:
    """c_s = 2 r_m - 2, acotado a [1, n]."""
    return int(min(max(2 * max_identifiable_rank(m, n, p) - 2, 1), n))
