"""
Monitoreo de recursos para solves y benchmarks.
Mide tiempo de pared y memoria residente del proceso con psutil.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, Optional

import psutil

from .logging_config import log_metrics

logger = logging.getLogger(__name__)


@dataclass
class ResourceUsage:
    """Uso de recursos de una operación"""
    operation: str
    wall_seconds: float = 0.0
    rss_before_mb: float = 0.0
    rss_after_mb: float = 0.0
    cpu_percent: float = 0.0

    @property
    def rss_delta_mb(self) -> float:
        return self.rss_after_mb - self.rss_before_mb

    def to_dict(self) -> Dict[str, float]:
        data = asdict(self)
        data['rss_delta_mb'] = self.rss_delta_mb
        return data


def _rss_mb(process: psutil.Process) -> float:
    return process.memory_info().rss / (1024 * 1024)


@contextmanager
def measure_resources(operation: str, tags: Optional[Dict[str, object]] = None) -> Iterator[ResourceUsage]:
    """
    Mide el uso de recursos del bloque y lo registra como métrica.

    Args:
        operation: Nombre de la operación medida
        tags: Tags adicionales para la métrica

    Yields:
        ResourceUsage que se completa al salir del bloque
    """
    process = psutil.Process()
    usage = ResourceUsage(operation=operation, rss_before_mb=_rss_mb(process))
    process.cpu_percent(None)
    start = time.perf_counter()
    try:
        yield usage
    finally:
        usage.wall_seconds = time.perf_counter() - start
        usage.rss_after_mb = _rss_mb(process)
        usage.cpu_percent = process.cpu_percent(None)
        log_metrics(f"{operation}_resources", usage.wall_seconds, {**(tags or {}), **usage.to_dict()})
        logger.debug(
            f"{operation}: {usage.wall_seconds:.3f}s, RSS {usage.rss_after_mb:.1f} MB "
            f"({usage.rss_delta_mb:+.1f} MB)"
        )
