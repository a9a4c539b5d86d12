"""
Arnés de benchmark: por cada celda (m, n, r, p) resuelve `trials` instancias
sembradas con un perfil y agrega NS / AT / RA / RU / RL.

Semillas: SeedSequence([base_seed, índice de celda, índice de prueba]) da
dos palabras de 64 bits, una para la instancia y otra para el muestreo de
FPCA. La agregación se hace en orden de prueba aunque las pruebas corran en
paralelo, por lo que las filas sólo dependen de base_seed (salvo AT).
"""

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..numerics.operators import MeasurementMap
from ..solvers.bregman import bregman_solve
from ..solvers.config import SolverConfig, get_profile
from ..solvers.fpc import SolveReport, fpc_solve
from ..utils.error_handler import ErrorCollector, FPCError, InputFormatError, ValidationError, log_error_with_context
from ..utils.logging_config import log_metrics
from .instances import gen_instance
from .metrics import freedom_stats, is_recovered, rel_error

logger = logging.getLogger(__name__)

CSV_HEADER = ("r", "FR", "NS", "AT", "RA", "RU", "RL")


class GridCell(BaseModel):
    """Una celda del grid de benchmark."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    m: int = Field(gt=0)
    n: int = Field(gt=0)
    r: int = Field(gt=0)
    p: int = Field(gt=0)

    @model_validator(mode='after')
    def _check_sizes(self) -> "GridCell":
        if self.r > min(self.m, self.n):
            raise ValueError(f"r={self.r} supera min(m, n)={min(self.m, self.n)}")
        if self.p > self.m * self.n:
            raise ValueError(f"p={self.p} supera m n={self.m * self.n}")
        return self

    @classmethod
    def of(cls, cell: Union["GridCell", Sequence[int]]) -> "GridCell":
        if isinstance(cell, GridCell):
            return cell
        m, n, r, p = cell
        return cls(m=m, n=n, r=r, p=p)


@dataclass(frozen=True)
class TrialResult:
    """Resultado de una prueba individual."""
    cell_index: int
    trial: int
    rel_err: Optional[float]
    elapsed_seconds: float
    hit_inner_max: bool = False
    error: Optional[str] = None

    @property
    def aborted(self) -> bool:
        return self.error is not None

    @property
    def recovered(self) -> bool:
        return self.rel_err is not None and is_recovered(self.rel_err)


@dataclass(frozen=True)
class BenchmarkRow:
    """
    Fila de tabla: r, FR, NS, AT, RA, RU, RL.

    AT, RA, RU y RL promedian sólo las instancias recuperadas y son None
    si NS = 0. Los campos restantes son metadatos fuera del CSV.
    """
    r: int
    FR: float
    NS: int
    AT: Optional[float]
    RA: Optional[float]
    RU: Optional[float]
    RL: Optional[float]
    m: int = field(default=0, compare=False)
    n: int = field(default=0, compare=False)
    p: int = field(default=0, compare=False)
    trials: int = field(default=0, compare=False)
    aborted: int = field(default=0, compare=False)
    hit_inner_max: int = field(default=0, compare=False)

    def csv_fields(self) -> List[str]:
        return [_format_value(getattr(self, name)) for name in CSV_HEADER]

    def without_timing(self) -> "BenchmarkRow":
        """Copia con AT = None, para comparar corridas repetidas."""
        return BenchmarkRow(**{**asdict(self), 'AT': None})


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def trial_seeds(base_seed: int, cell_index: int, trial: int) -> Tuple[int, int]:
    """(semilla de instancia, semilla de solver) para una prueba."""
    words = np.random.SeedSequence([base_seed, cell_index, trial]).generate_state(2, dtype=np.uint64)
    return int(words[0]), int(words[1])


def solve_with_profile(measurement_map: MeasurementMap, b, config: SolverConfig) -> SolveReport:
    """Bregman si config.bregman_outer > 0, si no FPC/FPCA."""
    if config.bregman_outer > 0:
        return bregman_solve(measurement_map, b, measurement_map.shape, config)
    return fpc_solve(measurement_map, b, measurement_map.shape, config)


def run_trial(cell: GridCell, cell_index: int, trial: int, base_seed: int,
              config: SolverConfig) -> TrialResult:
    """Genera y resuelve una instancia; los fallos de generación o del solver se devuelven, no se lanzan."""
    instance_seed, solver_seed = trial_seeds(base_seed, cell_index, trial)
    trial_config = config.with_overrides(seed=solver_seed) if config.approximate else config
    try:
        instance = gen_instance(cell.m, cell.n, cell.r, cell.p, instance_seed)
        report = solve_with_profile(instance.measurement_map, instance.b, trial_config)
    except FPCError as e:
        return TrialResult(cell_index, trial, None, 0.0, error=f"{e.error_code}: {e.message}")
    return TrialResult(
        cell_index=cell_index,
        trial=trial,
        rel_err=rel_error(report.X_opt, instance.M),
        elapsed_seconds=report.elapsed_seconds,
        hit_inner_max=report.hit_inner_max,
    )


def _run_task(task: Tuple[GridCell, int, int, int, SolverConfig]) -> TrialResult:
    return run_trial(*task)


def aggregate_cell(cell: GridCell, results: Sequence[TrialResult]) -> BenchmarkRow:
    """Pliega las pruebas de una celda en orden de prueba."""
    ordered = sorted(results, key=lambda result: result.trial)
    recovered = [result for result in ordered if result.recovered]
    errors = [result.rel_err for result in recovered]
    times = [result.elapsed_seconds for result in recovered]
    stats = freedom_stats(cell.m, cell.n, cell.p, cell.r)
    return BenchmarkRow(
        r=cell.r,
        FR=stats.FR,
        NS=len(recovered),
        AT=float(np.mean(times)) if recovered else None,
        RA=float(np.mean(errors)) if recovered else None,
        RU=float(np.max(errors)) if recovered else None,
        RL=float(np.min(errors)) if recovered else None,
        m=cell.m, n=cell.n, p=cell.p,
        trials=len(ordered),
        aborted=sum(result.aborted for result in ordered),
        hit_inner_max=sum(result.hit_inner_max for result in ordered),
    )


def run_benchmark(grid: Iterable[Union[GridCell, Sequence[int]]], trials: int,
                  solver_profile: Union[str, SolverConfig], base_seed: int = 0,
                  jobs: int = 1) -> List[BenchmarkRow]:
    """
    Ejecuta el protocolo de benchmark.

    Args:
        grid: Celdas (m, n, r, p)
        trials: Instancias por celda
        solver_profile: Nombre de perfil o SolverConfig
        base_seed: Semilla base
        jobs: Procesos en paralelo (1 = secuencial)

    Returns:
        Una BenchmarkRow por celda, en el orden del grid
    """
    if trials < 1:
        raise ValidationError(f"trials debe ser >= 1, recibido {trials}", "trials")
    if jobs < 1:
        raise ValidationError(f"jobs debe ser >= 1, recibido {jobs}", "jobs")
    cells = [GridCell.of(cell) for cell in grid]
    config = get_profile(solver_profile) if isinstance(solver_profile, str) else solver_profile
    profile_name = solver_profile if isinstance(solver_profile, str) else "custom"

    tasks = [
        (cell, cell_index, trial, base_seed, config)
        for cell_index, cell in enumerate(cells)
        for trial in range(trials)
    ]
    logger.info(f"🚀 Benchmark {profile_name}: {len(cells)} celdas x {trials} pruebas, jobs={jobs}")
    start = time.perf_counter()

    if jobs == 1:
        results = [_run_task(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            # map conserva el orden de las tareas
            results = list(executor.map(_run_task, tasks, chunksize=max(1, trials // jobs)))

    collector = ErrorCollector()
    rows = []
    for cell_index, cell in enumerate(cells):
        cell_results = [result for result in results if result.cell_index == cell_index]
        for result in cell_results:
            if result.aborted:
                log_error_with_context(
                    FPCError(result.error, "SOLVER_ABORT"),
                    {'cell': cell.model_dump(), 'trial': result.trial},
                    "run_benchmark",
                    collector,
                )
        row = aggregate_cell(cell, cell_results)
        rows.append(row)
        logger.info(
            f"📊 m={cell.m} n={cell.n} p={cell.p} r={cell.r}: NS={row.NS}/{row.trials}, "
            f"abortadas={row.aborted}, con I_m={row.hit_inner_max}"
        )
        log_metrics("benchmark_cell_recovered", row.NS, {
            'profile': profile_name, 'm': cell.m, 'n': cell.n, 'p': cell.p, 'r': cell.r,
            'aborted': row.aborted, 'hit_inner_max': row.hit_inner_max,
        })

    if collector.total:
        logger.warning(f"⚠️ {collector.total} pruebas abortadas por el solver: {collector.summary()['by_code']}")
    logger.info(f"✅ Benchmark completado en {time.perf_counter() - start:.1f}s")
    return rows


def write_benchmark_csv(rows: Iterable[BenchmarkRow], target: Union[str, Path, io.TextIOBase]) -> None:
    """Escribe las filas con cabecera r,FR,NS,AT,RA,RU,RL; None se escribe vacío."""
    if isinstance(target, (str, Path)):
        with open(target, 'w', encoding='utf-8', newline='') as handle:
            write_benchmark_csv(rows, handle)
        return
    writer = csv.writer(target, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())


def read_benchmark_csv(source: Union[str, Path, io.TextIOBase]) -> List[BenchmarkRow]:
    if isinstance(source, (str, Path)):
        with open(source, 'r', encoding='utf-8', newline='') as handle:
            return _parse_rows(handle, str(source))
    return _parse_rows(source, "<stream>")


def _parse_rows(handle, path: str) -> List[BenchmarkRow]:
    reader = csv.reader(handle)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise InputFormatError(f"Cabecera esperada {','.join(CSV_HEADER)}, recibida {header}", path, 1)

    def optional(text: str) -> Optional[float]:
        return float(text) if text != "" else None

    rows = []
    for line_number, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(CSV_HEADER):
            raise InputFormatError(f"Se esperaban {len(CSV_HEADER)} campos, hay {len(fields)}", path, line_number)
        try:
            rows.append(BenchmarkRow(
                r=int(fields[0]), FR=float(fields[1]), NS=int(fields[2]),
                AT=optional(fields[3]), RA=optional(fields[4]),
                RU=optional(fields[5]), RL=optional(fields[6]),
            ))
        except ValueError as e:
            raise InputFormatError(f"Valor inválido: {e}", path, line_number)
    return rows
