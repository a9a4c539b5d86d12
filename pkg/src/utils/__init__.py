"""Utilidades del solver.
Incluye manejo de errores, logging, validación de configuración y monitoreo de recursos."""

from .error_handler import (
    FPCError,
    ValidationError,
    InputFormatError,
    NumericalError,
    ErrorCollector,
    log_error_with_context,
    exit_code_for,
    describe_error,
    EXIT_OK,
    EXIT_UNEXPECTED,
    EXIT_INVALID_INPUT,
    EXIT_SOLVER_ABORT,
)

from .logging_config import (
    setup_logging,
    log_metrics,
    log_solve
)

from .config_validator import (
    ConfigValidator,
    ValidationResult
)

from .resource_monitor import (
    ResourceUsage,
    measure_resources
)

__all__ = [
    # Error handling
    'FPCError', 'ValidationError', 'InputFormatError', 'NumericalError',
    'ErrorCollector', 'log_error_with_context', 'exit_code_for', 'describe_error',
    'EXIT_OK', 'EXIT_UNEXPECTED', 'EXIT_INVALID_INPUT', 'EXIT_SOLVER_ABORT',

    # Logging
    'setup_logging', 'log_metrics', 'log_solve',

    # Configuration
    'ConfigValidator', 'ValidationResult',

    # Resource monitoring
    'ResourceUsage', 'measure_resources'
]
