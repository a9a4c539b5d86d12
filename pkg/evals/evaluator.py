# Package de evaluación: reproducción de las tablas de recuperación
import json
import os
import time
import logging
from typing import Dict, List, Any, Optional, Sequence
from dataclasses import dataclass, asdict, field
from datetime import datetime
import statistics

from src.problems.benchmark import BenchmarkRow, GridCell, run_benchmark, trial_seeds
from src.problems.instances import gen_instance
from src.problems.metrics import is_recovered, rel_error
from src.solvers.bregman import bregman_solve
from src.solvers.config import get_profile
from src.solvers.fpc import fpc_solve

logger = logging.getLogger(__name__)

# NS de referencia (sobre 50 instancias) por rango
REFERENCE_NS = {
    # m = n = 40, p = 800
    "small_fpc1": {1: 50, 2: 42, 3: 35, 4: 22, 5: 1, 6: 0},
    "small_fpc2": {1: 50, 2: 42, 3: 35, 4: 22, 5: 1, 6: 0},
    "small_fpc3": {1: 50, 2: 49, 3: 42, 4: 29, 5: 5, 6: 0},
    "small_fpca": {1: 50, 2: 50, 3: 50, 4: 50, 5: 50, 6: 50, 7: 50, 8: 50, 9: 49, 10: 30, 11: 0},
    # m = n = 100, p = 2000
    "medium_fpca": {1: 50, 2: 50, 3: 50, 4: 50, 5: 50, 6: 50, 7: 49, 8: 32, 9: 1, 10: 0},
}
REFERENCE_TRIALS = 50

# Problemas fáciles (n, r, p) para el perfil fpca-easy y rel.err de referencia
EASY_PROBLEMS = [
    (100, 10, 5666, 4.27e-5),
    (200, 10, 15665, 6.40e-5),
    (500, 10, 49471, 2.48e-4),
    (1000, 10, 119406, 5.04e-4),
]
EASY_MAX_REL_ERR = 1e-3


@dataclass
class ReproductionResult:
    """Resultado de reproducir una tabla."""
    experiment_id: str
    timestamp: datetime
    profile: str
    trials: int
    rows: List[Dict[str, Any]]
    success: bool
    execution_time: float
    mismatches: List[str] = field(default_factory=list)
    error_message: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convertir a diccionario para serialización."""
        data = asdict(self)
        data['timestamp'] = self.timestamp.isoformat()
        return data


def expected_successes(reference_ns: int, trials: int) -> float:
    """NS de referencia reescalado a `trials` instancias."""
    return reference_ns * trials / REFERENCE_TRIALS


class BenchmarkEvaluator:
    """Reproduce las tablas de recuperación y guarda los resultados."""

    def __init__(self, results_file: str = "evals/results.json", base_seed: int = 0, jobs: int = 1):
        self.results_file = results_file
        self.base_seed = base_seed
        self.jobs = jobs
        self.results: List[Dict[str, Any]] = []
        self.load_existing_results()

    def load_existing_results(self):
        """Cargar resultados de reproducciones previas."""
        try:
            if os.path.exists(self.results_file):
                with open(self.results_file, 'r', encoding='utf-8') as f:
                    self.results = json.load(f)
                logger.info(f"✅ Cargados {len(self.results)} resultados previos")
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error cargando resultados: {e}")
            self.results = []

    def save_results(self):
        """Guardar todos los resultados en archivo JSON."""
        try:
            os.makedirs(os.path.dirname(self.results_file) or ".", exist_ok=True)
            with open(self.results_file, 'w', encoding='utf-8') as f:
                json.dump(self.results, f, indent=2, ensure_ascii=False)
            logger.info(f"✅ Guardados {len(self.results)} resultados")
        except OSError as e:
            logger.error(f"Error guardando resultados: {e}")

    def _record(self, result: ReproductionResult) -> ReproductionResult:
        self.results.append(result.to_dict())
        status = "✅" if result.success else "❌"
        logger.info(f"{status} {result.experiment_id}: {result.execution_time:.1f}s")
        for mismatch in result.mismatches:
            logger.warning(f"⚠️ {result.experiment_id}: {mismatch}")
        return result

    def evaluate_table(self, experiment_id: str, m: int, n: int, p: int, ranks: Sequence[int],
                       profile: str, trials: int, slack: int = 2) -> ReproductionResult:
        """
        Corre un grid de rangos y compara NS con la tabla de referencia.

        Args:
            slack: Diferencia tolerada en número de éxitos
        """
        reference = REFERENCE_NS[experiment_id]
        start = time.time()
        try:
            rows = run_benchmark(
                [GridCell(m=m, n=n, r=r, p=p) for r in ranks], trials, profile,
                base_seed=self.base_seed, jobs=self.jobs,
            )
        except Exception as e:
            logger.error(f"Error en {experiment_id}: {e}")
            return self._record(ReproductionResult(
                experiment_id, datetime.now(), profile, trials, [], False, time.time() - start,
                error_message=str(e),
            ))

        mismatches = []
        for row in rows:
            expected = expected_successes(reference[row.r], trials)
            if abs(row.NS - expected) > slack:
                mismatches.append(f"r={row.r}: NS={row.NS}, esperado ~{expected:.1f}")
        return self._record(ReproductionResult(
            experiment_id=experiment_id,
            timestamp=datetime.now(),
            profile=profile,
            trials=trials,
            rows=[_row_dict(row) for row in rows],
            success=not mismatches,
            execution_time=time.time() - start,
            mismatches=mismatches,
        ))

    def evaluate_bregman(self, trials: int, rank: int = 1, m: int = 40, n: int = 40, p: int = 800,
                         min_reduction: float = 100.0) -> ReproductionResult:
        """Mediana de rel.err(FPC2) / rel.err(Bregman) sobre las instancias que FPC2 recupera."""
        start = time.time()
        fpc2, bregman = get_profile("fpc2"), get_profile("bregman")
        reductions = []
        rows = []
        for trial in range(trials):
            instance_seed, _ = trial_seeds(self.base_seed, 0, trial)
            instance = gen_instance(m, n, rank, p, instance_seed)
            before = rel_error(fpc_solve(instance.measurement_map, instance.b, config=fpc2).X_opt, instance.M)
            if not is_recovered(before):
                continue
            after = rel_error(bregman_solve(instance.measurement_map, instance.b, config=bregman).X_opt, instance.M)
            reductions.append(before / after if after > 0 else float('inf'))
            rows.append({'trial': trial, 'fpc2_rel_err': before, 'bregman_rel_err': after})

        median = statistics.median(reductions) if reductions else 0.0
        mismatches = [] if median >= min_reduction else [f"reducción mediana {median:.3g} < {min_reduction:g}"]
        return self._record(ReproductionResult(
            experiment_id="bregman_gain",
            timestamp=datetime.now(),
            profile="bregman",
            trials=trials,
            rows=rows,
            success=bool(reductions) and not mismatches,
            execution_time=time.time() - start,
            mismatches=mismatches,
        ))

    def evaluate_fpca_easy(self, trials: int = 5,
                           problems: Sequence[tuple] = tuple(EASY_PROBLEMS),
                           max_rel_err: float = EASY_MAX_REL_ERR) -> ReproductionResult:
        """
        Problemas cuadrados de rango muy bajo con el perfil fpca-easy.

        Cada problema se promedia sobre `trials` instancias; falla si el
        rel.err medio supera max_rel_err.
        """
        start = time.time()
        config = get_profile("fpca-easy")
        rows = []
        mismatches = []
        for cell_index, (n, r, p, reference_rel_err) in enumerate(problems):
            errors, times = [], []
            for trial in range(trials):
                instance_seed, solver_seed = trial_seeds(self.base_seed, cell_index, trial)
                instance = gen_instance(n, n, r, p, instance_seed)
                report = fpc_solve(instance.measurement_map, instance.b,
                                   config=config.with_overrides(seed=solver_seed))
                errors.append(rel_error(report.X_opt, instance.M))
                times.append(report.elapsed_seconds)
            mean_err = statistics.fmean(errors)
            rows.append({'n': n, 'r': r, 'p': p, 'rel_err': mean_err, 'seconds': statistics.fmean(times),
                         'reference_rel_err': reference_rel_err})
            logger.info(f"📊 fpca-easy n={n} r={r} p={p}: rel.err={mean_err:.2e} (ref {reference_rel_err:.2e})")
            if mean_err > max_rel_err:
                mismatches.append(f"n={n}, r={r}: rel.err {mean_err:.2e} > {max_rel_err:g}")

        return self._record(ReproductionResult(
            experiment_id="easy_fpca",
            timestamp=datetime.now(),
            profile="fpca-easy",
            trials=trials,
            rows=rows,
            success=not mismatches,
            execution_time=time.time() - start,
            mismatches=mismatches,
        ))

    def generate_report(self) -> Dict[str, Any]:
        """Resumen de las reproducciones registradas."""
        if not self.results:
            return {"message": "No hay resultados de evaluación disponibles"}
        return {
            "total": len(self.results),
            "passed": sum(1 for result in self.results if result['success']),
            "experiments": {
                result['experiment_id']: {
                    "success": result['success'],
                    "execution_time": result['execution_time'],
                    "mismatches": result['mismatches'],
                }
                for result in self.results
            },
        }


def _row_dict(row: BenchmarkRow) -> Dict[str, Any]:
    return asdict(row)
