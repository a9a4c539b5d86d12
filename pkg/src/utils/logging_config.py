"""
Configuración de logging para el solver de completación de matrices.
Incluye consola con colores, rotación de archivos y un flujo JSON-lines opcional.
"""

import json
import logging
import logging.handlers
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

APP_LOGGER = "src"


class StructuredFormatter(logging.Formatter):
    """Formatter que produce logs estructurados en JSON (una línea por registro)."""

    def format(self, record: logging.LogRecord) -> str:
        log_entry = {
            'timestamp': datetime.fromtimestamp(record.created).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
            'module': record.module,
            'function': record.funcName,
            'line': record.lineno
        }

        # Agregar información adicional si está disponible
        for key in ('operation', 'profile', 'error_context', 'error_type', 'metric'):
            if hasattr(record, key):
                log_entry[key] = getattr(record, key)

        if record.exc_info:
            log_entry['exception'] = self.formatException(record.exc_info)

        return json.dumps(log_entry, ensure_ascii=False, separators=(',', ':'), default=str)


class ColoredConsoleFormatter(logging.Formatter):
    """Formatter con colores para la consola."""

    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Verde
        'WARNING': '\033[33m',    # Amarillo
        'ERROR': '\033[31m',      # Rojo
        'CRITICAL': '\033[35m',   # Magenta
        'RESET': '\033[0m'
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        reset = self.COLORS['RESET']
        # Copia para no contaminar el registro que ven los otros handlers
        record = logging.makeLogRecord(record.__dict__)
        record.levelname = f"{color}{record.levelname}{reset}"
        return super().format(record)


def setup_logging(
    log_level: str = "INFO",
    log_dir: Optional[str] = None,
    json_log_path: Optional[str] = None,
    max_file_size: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5,
    enable_console: bool = True
) -> Dict[str, logging.Logger]:
    """
    Configurar el sistema de logging del paquete.

    Args:
        log_level: Nivel de logging (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directorio para el log rotativo; None desactiva el archivo
        json_log_path: Ruta del flujo JSON-lines (--log); None lo desactiva
        max_file_size: Tamaño máximo de archivo de log en bytes
        backup_count: Número de archivos de backup a mantener
        enable_console: Si habilitar logging a consola (stderr)

    Returns:
        Dict con los loggers configurados
    """
    numeric_level = getattr(logging, log_level.upper(), logging.INFO)

    main_logger = logging.getLogger(APP_LOGGER)
    main_logger.setLevel(numeric_level)
    for handler in list(main_logger.handlers):
        main_logger.removeHandler(handler)
        handler.close()

    error_logger = logging.getLogger(f"{APP_LOGGER}.errors")
    metrics_logger = logging.getLogger(f"{APP_LOGGER}.metrics")
    metrics_logger.setLevel(logging.INFO)

    standard_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    if enable_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(ColoredConsoleFormatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%H:%M:%S'
        ))
        main_logger.addHandler(console_handler)

    if log_dir:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_path / "fpc.log",
            maxBytes=max_file_size,
            backupCount=backup_count,
            encoding='utf-8'
        )
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(standard_formatter)
        main_logger.addHandler(file_handler)

    if json_log_path:
        Path(json_log_path).parent.mkdir(parents=True, exist_ok=True)
        json_handler = logging.FileHandler(json_log_path, encoding='utf-8')
        json_handler.setLevel(logging.DEBUG)
        json_handler.setFormatter(StructuredFormatter())
        main_logger.addHandler(json_handler)

    # Reducir verbosidad de librerías externas
    logging.getLogger('PIL').setLevel(logging.WARNING)

    main_logger.debug(f"Sistema de logging inicializado - Nivel: {log_level}")

    return {
        'main': main_logger,
        'errors': error_logger,
        'metrics': metrics_logger
    }


def log_metrics(metric_name: str, value: Any, tags: Dict[str, Any] = None):
    """
    Registrar métrica del sistema.

    Args:
        metric_name: Nombre de la métrica
        value: Valor de la métrica
        tags: Tags adicionales para la métrica
    """
    metrics_logger = logging.getLogger(f'{APP_LOGGER}.metrics')

    metric_data = {
        'metric': metric_name,
        'value': value,
        'tags': tags or {},
        'timestamp': datetime.now().isoformat()
    }

    metrics_logger.info(json.dumps(metric_data, ensure_ascii=False, default=str),
                        extra={'metric': metric_name})


def log_solve(profile: str, shape: tuple, report: Any, rel_err: Optional[float] = None):
    """
    Registrar el resumen de un solve terminado.

    Args:
        profile: Nombre del perfil de solver
        shape: Dimensiones (m, n) del problema
        report: SolveReport devuelto por el solver
        rel_err: Error relativo contra la verdad, si se conoce
    """
    tags = {
        'profile': profile,
        'shape': list(shape),
        'rank': report.final_rank,
        'stages': len(report.mu_path),
        'iterations': int(sum(report.inner_iterations)),
        'svd_calls': report.svd_calls,
        'residual_norm': report.residual_norm,
    }
    if rel_err is not None:
        tags['rel_err'] = rel_err
    log_metrics("solve_seconds", report.elapsed_seconds, tags)
