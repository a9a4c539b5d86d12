"""
Módulo de manejo de errores para el solver de completación de matrices.
Define la jerarquía de excepciones, el colector de errores y el mapeo a códigos de salida.
"""

import logging
import traceback
from collections import Counter, deque
from datetime import datetime
from typing import Deque, Dict, Optional

# Logger específico para errores
error_logger = logging.getLogger('src.errors')

# Códigos de salida de la CLI
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INVALID_INPUT = 2
EXIT_SOLVER_ABORT = 3


class FPCError(Exception):
    """Excepción base para errores del solver."""
    def __init__(self, message: str, error_code: str = None, details: Dict = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or "FPC_ERROR"
        self.details = details or {}
        self.timestamp = datetime.now().isoformat()


class ValidationError(FPCError, ValueError):
    """Error de validación de datos o precondiciones."""
    def __init__(self, message: str, field: str = None, **kwargs):
        super().__init__(message, "VALIDATION_ERROR", **kwargs)
        self.field = field


class InputFormatError(FPCError):
    """Error de formato en un archivo de entrada (matriz, imagen, ratings)."""
    def __init__(self, message: str, path: str = None, line: int = None, **kwargs):
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}", "INPUT_FORMAT_ERROR", **kwargs)
        self.path = path
        self.line = line


class NumericalError(FPCError):
    """Error numérico que aborta un solve (SVD fallida, objetivo divergente)."""
    def __init__(self, message: str, operation: str = None, **kwargs):
        super().__init__(message, "NUMERICAL_ERROR", **kwargs)
        self.operation = operation


class ErrorCollector:
    """
    Acumula los fallos de una corrida larga (p. ej. pruebas abortadas del
    benchmark) y los cuenta por código de error y por operación.
    """

    def __init__(self, max_errors: int = 1000):
        self.max_errors = max_errors
        self.errors: Deque[Dict] = deque(maxlen=max_errors)
        self.by_code: Counter = Counter()
        self.by_operation: Counter = Counter()

    def add_error(self, error: Exception, context: Dict = None):
        context = context or {}
        code = error.error_code if isinstance(error, FPCError) else type(error).__name__
        self.errors.append({
            'code': code,
            'message': str(error),
            'context': context,
            'details': getattr(error, 'details', {}),
        })
        self.by_code[code] += 1
        self.by_operation[context.get('operation') or '-'] += 1

    @property
    def total(self) -> int:
        return sum(self.by_code.values())

    def summary(self, recent: int = 10) -> Dict:
        """Totales por código y operación más los últimos `recent` errores."""
        return {
            'total': self.total,
            'by_code': dict(self.by_code),
            'by_operation': dict(self.by_operation),
            'recent': list(self.errors)[-recent:],
        }


def log_error_with_context(
    error: Exception,
    context: Dict = None,
    operation: str = None,
    collector: Optional[ErrorCollector] = None
):
    """
    Registra el error en `src.errors` y, si se da, lo acumula en `collector`.

    Los FPCError se registran sin traza; cualquier otra excepción la incluye.
    """
    error_context = {'operation': operation, **(context or {})}
    if collector is not None:
        collector.add_error(error, error_context)

    where = ", ".join(f"{k}={v}" for k, v in error_context.items() if k != 'operation' and v is not None)
    error_logger.error(
        f"{operation or 'operación desconocida'}: {error}" + (f" [{where}]" if where else ""),
        extra={'error_type': type(error).__name__, 'error_context': error_context},
        exc_info=not isinstance(error, FPCError),
    )


def exit_code_for(error: Optional[BaseException]) -> int:
    """
    Mapear una excepción al código de salida de la CLI.

    Returns:
        0 sin error, 2 entrada inválida, 3 aborto del solver, 1 inesperado
    """
    if error is None:
        return EXIT_OK
    if isinstance(error, NumericalError):
        return EXIT_SOLVER_ABORT
    if isinstance(error, (ValidationError, InputFormatError, OSError)):
        return EXIT_INVALID_INPUT
    return EXIT_UNEXPECTED


def describe_error(error: BaseException, include_details: bool = False) -> str:
    """
    Crear un mensaje de error legible para la terminal.

    Args:
        error: La excepción ocurrida
        include_details: Si incluir los detalles técnicos del error
    """
    if isinstance(error, FPCError):
        message = f"❌ {error.error_code}: {error.message}"
        if include_details and error.details:
            details_text = "\n".join([f"  • {k}: {v}" for k, v in error.details.items()])
            message += f"\n{details_text}"
        return message
    if isinstance(error, OSError):
        return f"❌ Error de archivo: {error}"
    message = f"❌ Error inesperado: {error}"
    if include_details:
        message += "\n" + "".join(traceback.format_exception(type(error), error, error.__traceback__))
    return message
