"""
Validador de configuración para el solver de completación de matrices.
Verifica las variables de entorno que controlan logging, paralelismo y semillas.
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)

VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


@dataclass
class ValidationResult:
    """Resultado de la validación de configuración."""
    is_valid: bool
    invalid_values: List[str]
    warnings: List[str]
    values: Dict[str, str] = field(default_factory=dict)


class ConfigValidator:
    """Validador de configuración del sistema."""

    # Variables opcionales con su valor por defecto
    OPTIONAL_VARS = {
        "FPC_LOG_LEVEL": "INFO",
        "FPC_LOG_DIR": "",
        "FPC_JOBS": "1",
        "FPC_DEFAULT_PROFILE": "fpc1",
        "FPC_BASE_SEED": "0",
    }

    @classmethod
    def validate_configuration(cls, environ: Optional[Dict[str, str]] = None) -> ValidationResult:
        """
        Valida toda la configuración del sistema.

        Args:
            environ: Mapeo de variables a validar (por defecto os.environ)

        Returns:
            ValidationResult: Resultado detallado de la validación
        """
        environ = os.environ if environ is None else environ
        invalid_values = []
        warnings = []
        values = {}

        for var, default in cls.OPTIONAL_VARS.items():
            value = environ.get(var)
            if value is None or value == "":
                values[var] = default
                logger.debug(f"{var}: no configurada (usando por defecto: {default!r})")
                continue
            validation_error = cls._validate_variable_format(var, value)
            if validation_error:
                invalid_values.append(f"{var}: {validation_error}")
                logger.warning(f"⚠️ {var}: FORMATO INVÁLIDO - {validation_error}")
            else:
                values[var] = value

        cls._validate_parallelism(values, warnings)

        is_valid = len(invalid_values) == 0
        if not is_valid:
            logger.error(f"❌ Configuración inválida: {len(invalid_values)} valores incorrectos")
        for warning in warnings:
            logger.warning(f"⚠️ {warning}")

        return ValidationResult(
            is_valid=is_valid,
            invalid_values=invalid_values,
            warnings=warnings,
            values=values
        )

    @classmethod
    def _validate_variable_format(cls, var_name: str, value: str) -> Optional[str]:
        """Valida el formato de una variable específica."""
        if var_name == "FPC_LOG_LEVEL":
            if value.upper() not in VALID_LOG_LEVELS:
                return f"Nivel de log debe ser uno de: {', '.join(VALID_LOG_LEVELS)}"

        elif var_name == "FPC_JOBS":
            try:
                jobs = int(value)
                if jobs < 1:
                    return "Número de procesos debe ser mayor a 0"
            except ValueError:
                return "Número de procesos debe ser un número entero"

        elif var_name == "FPC_DEFAULT_PROFILE":
            # Importación diferida para evitar ciclos al cargar utilidades
            from ..solvers.config import PROFILES
            if value not in PROFILES:
                return f"Perfil debe ser uno de: {', '.join(PROFILES)}"

        elif var_name == "FPC_BASE_SEED":
            try:
                seed = int(value)
                if seed < 0:
                    return "La semilla no puede ser negativa"
            except ValueError:
                return "La semilla debe ser un número entero"

        return None

    @classmethod
    def _validate_parallelism(cls, values: Dict[str, str], warnings: List[str]) -> None:
        """Advierte si se piden más procesos que CPUs disponibles."""
        try:
            jobs = int(values.get("FPC_JOBS", "1"))
        except ValueError:
            return
        cpus = os.cpu_count() or 1
        if jobs > cpus:
            warnings.append(f"FPC_JOBS={jobs} supera las {cpus} CPUs disponibles")
