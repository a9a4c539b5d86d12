"""
Línea de comandos: generate, solve, benchmark, inpaint y eval-nmae.

Cada flag omitido toma el valor del perfil elegido; los perfiles parten de
los valores por defecto de SolverConfig.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError as PydanticValidationError, field_validator

from ..problems.benchmark import GridCell, run_benchmark, solve_with_profile, write_benchmark_csv
from ..problems.instances import gen_instance
from ..problems.metrics import freedom_stats, rel_error
from ..solvers.config import PROFILES, SolverConfig, get_profile
from ..utils.error_handler import EXIT_OK, InputFormatError, ValidationError
from ..utils.logging_config import log_metrics, log_solve
from ..utils.resource_monitor import measure_resources
from .inpaint import MaskSpec, inpaint
from .matrix_io import load_matrix, load_observations, store_matrix, store_observations
from .ratings import eval_nmae

logger = logging.getLogger(__name__)

Subcommand = Literal["generate", "solve", "benchmark", "inpaint", "eval-nmae"]

# flag -> campo de SolverConfig
SOLVER_FLAGS = {
    "mu_bar": "mu_bar",
    "eta_mu": "eta_mu",
    "tau": "tau",
    "xtol": "xtol",
    "gtol": "gtol",
    "inner_max": "inner_max",
    "eps_ks": "epsilon_ks",
    "cs": "c_s",
    "bregman_outer": "bregman_outer",
}


class RunConfig(BaseModel):
    """Invocación validada de la CLI."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    subcommand: Subcommand
    profile: str = "fpc1"
    overrides: Dict[str, Any] = Field(default_factory=dict)
    options: Dict[str, Any] = Field(default_factory=dict)
    log_path: Optional[str] = None
    log_level: str = "INFO"

    @field_validator('profile')
    @classmethod
    def _known_profile(cls, value: str) -> str:
        if value not in PROFILES:
            raise ValueError(f"perfil desconocido '{value}', disponibles: {', '.join(PROFILES)}")
        return value

    def solver_config(self) -> SolverConfig:
        return get_profile(self.profile).with_overrides(**self.overrides)

    def option(self, name: str, default: Any = None) -> Any:
        value = self.options.get(name)
        return default if value is None else value


def _add_solver_flags(parser: argparse.ArgumentParser, default_profile: str) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--profile", default=default_profile, choices=sorted(PROFILES),
                       help=f"perfil de solver (por defecto {default_profile})")
    group.add_argument("--mu-bar", type=float, help="mu final")
    group.add_argument("--eta-mu", type=float, help="factor de reducción de mu, en (0, 1)")
    group.add_argument("--tau", type=float, help="paso del gradiente")
    group.add_argument("--xtol", type=float, help="tolerancia sobre X")
    group.add_argument("--gtol", type=float, help="tolerancia sobre g")
    group.add_argument("--inner-max", type=int, help="iteraciones máximas por mu (I_m)")
    group.add_argument("--eps-ks", type=float, help="umbral relativo del rango adaptativo")
    group.add_argument("--cs", type=int, help="columnas muestreadas por la SVD aproximada")
    group.add_argument("--bregman-outer", type=int, help="iteraciones externas de Bregman")


def build_parser(defaults: Optional[Dict[str, str]] = None) -> argparse.ArgumentParser:
    """Parser de la CLI; defaults son los valores del entorno (FPC_*)."""
    defaults = defaults or {}
    default_profile = defaults.get("FPC_DEFAULT_PROFILE", "fpc1")
    base_seed = int(defaults.get("FPC_BASE_SEED", "0"))
    jobs = int(defaults.get("FPC_JOBS", "1"))

    parser = argparse.ArgumentParser(
        prog="fpc", description="Minimización de norma nuclear por continuación de punto fijo"
    )
    parser.add_argument("--log", dest="log_path", help="flujo JSON-lines de logs")
    parser.add_argument("--log-level", default=defaults.get("FPC_LOG_LEVEL", "INFO"))
    sub = parser.add_subparsers(dest="subcommand", required=True)

    generate = sub.add_parser("generate", help="genera una instancia aleatoria de completación")
    generate.add_argument("--rows", type=int, required=True)
    generate.add_argument("--cols", type=int, required=True)
    generate.add_argument("--rank", type=int, required=True)
    generate.add_argument("--samples", type=int, required=True)
    generate.add_argument("--seed", type=int, default=base_seed)
    generate.add_argument("--out", required=True, help="archivo de observaciones (coordenadas)")
    generate.add_argument("--truth", help="archivo donde escribir M")

    solve = sub.add_parser("solve", help="resuelve a partir de un archivo de observaciones")
    solve.add_argument("input", help="observaciones en coordenadas o CSV denso")
    solve.add_argument("--out", help="archivo de salida para X")
    solve.add_argument("--truth", help="M de referencia para reportar rel.err")
    solve.add_argument("--seed", type=int, help="semilla de la SVD aproximada")
    _add_solver_flags(solve, default_profile)

    benchmark = sub.add_parser("benchmark", help="reproduce una tabla de recuperación")
    benchmark.add_argument("--grid", help="JSON con una lista de celdas {m, n, r, p}")
    benchmark.add_argument("--rows", type=int)
    benchmark.add_argument("--cols", type=int)
    benchmark.add_argument("--samples", type=int)
    benchmark.add_argument("--rank", type=int, nargs="+", help="uno o más rangos")
    benchmark.add_argument("--trials", type=int, default=50)
    benchmark.add_argument("--seed", type=int, default=base_seed, help="semilla base")
    benchmark.add_argument("--jobs", type=int, default=jobs)
    benchmark.add_argument("--out", help="CSV de salida (por defecto stdout)")
    _add_solver_flags(benchmark, default_profile)

    inpaint_parser = sub.add_parser("inpaint", help="inpainting de una imagen PGM")
    inpaint_parser.add_argument("image")
    mask = inpaint_parser.add_mutually_exclusive_group()
    mask.add_argument("--mask-fraction", type=float, default=0.5, help="fracción de píxeles ocultos")
    mask.add_argument("--mask-file", help="PGM de máscara (no nulo = observado)")
    inpaint_parser.add_argument("--seed", type=int, default=base_seed)
    inpaint_parser.add_argument("--truncate-rank", type=int)
    inpaint_parser.add_argument("--original", help="imagen de referencia para rel.err")
    inpaint_parser.add_argument("--out", help="PGM de salida")
    _add_solver_flags(inpaint_parser, "fpca")

    nmae_parser = sub.add_parser("eval-nmae", help="NMAE sobre ratings retenidos")
    nmae_parser.add_argument("ratings", help="CSV usuario,ítem,rating")
    nmae_parser.add_argument("--holdout", type=int, default=2)
    nmae_parser.add_argument("--seed", type=int, default=base_seed)
    nmae_parser.add_argument("--rating-min", type=float, default=-10.0)
    nmae_parser.add_argument("--rating-max", type=float, default=10.0)
    _add_solver_flags(nmae_parser, "fpca")

    return parser


def parse_run_config(argv: Optional[Sequence[str]] = None,
                     defaults: Optional[Dict[str, str]] = None) -> RunConfig:
    """Parsea argv y valida la invocación."""
    namespace = vars(build_parser(defaults).parse_args(argv))
    subcommand = namespace.pop("subcommand")
    log_path = namespace.pop("log_path")
    log_level = namespace.pop("log_level")
    profile = namespace.pop("profile", None) or "fpc1"
    overrides = {
        field: namespace.pop(flag) for flag, field in SOLVER_FLAGS.items()
        if flag in namespace and namespace[flag] is not None
    }
    for flag in SOLVER_FLAGS:
        namespace.pop(flag, None)
    try:
        return RunConfig(
            subcommand=subcommand, profile=profile, overrides=overrides, options=namespace,
            log_path=log_path, log_level=log_level,
        )
    except PydanticValidationError as e:
        raise ValidationError(f"Argumentos inválidos: {e.errors()[0].get('msg')}", "argv")


def cmd_generate(run: RunConfig) -> int:
    m, n, r, p = (run.option(name) for name in ("rows", "cols", "rank", "samples"))
    instance = gen_instance(m, n, r, p, run.option("seed", 0))
    store_observations(run.option("out"), instance.measurement_map, instance.b)
    if run.option("truth"):
        store_matrix(run.option("truth"), instance.M)
    stats = freedom_stats(m, n, p, r)
    print(f"m={m} n={n} r={r} p={p} SR={stats.SR:.4f} FR={stats.FR:.4f} r_m={stats.r_m}")
    logger.info(f"✅ Instancia escrita en {run.option('out')}")
    return EXIT_OK


def cmd_solve(run: RunConfig) -> int:
    config = run.solver_config()
    if run.option("seed") is not None:
        config = config.with_overrides(seed=run.option("seed"))
    measurement_map, b = load_observations(run.option("input"))
    with measure_resources("solve", {'profile': run.profile}):
        report = solve_with_profile(measurement_map, b, config)

    error = None
    if run.option("truth"):
        error = rel_error(report.X_opt, load_matrix(run.option("truth")))
    log_solve(run.profile, measurement_map.shape, report, error)
    if run.option("out"):
        store_matrix(run.option("out"), report.X_opt)

    summary = (
        f"rank={report.final_rank} stages={len(report.mu_path)} iterations={report.total_iterations} "
        f"residual={report.residual_norm:.6e} seconds={report.elapsed_seconds:.3f}"
    )
    if error is not None:
        summary += f" rel_err={error:.6e}"
    print(summary)
    return EXIT_OK


def load_grid(path: str) -> List[GridCell]:
    """Grid JSON: [{"m": 40, "n": 40, "r": 1, "p": 800}, ...]."""
    try:
        text = Path(path).read_text(encoding='utf-8')
        return TypeAdapter(List[GridCell]).validate_json(text)
    except PydanticValidationError as e:
        first = e.errors()[0]
        raise InputFormatError(f"grid inválido en {list(first.get('loc', ()))}: {first.get('msg')}", path)


def _grid_from_flags(run: RunConfig) -> List[GridCell]:
    if run.option("grid"):
        return load_grid(run.option("grid"))
    missing = [flag for flag in ("rows", "cols", "samples", "rank") if run.option(flag) is None]
    if missing:
        raise ValidationError(
            f"benchmark necesita --grid o --rows/--cols/--samples/--rank (faltan: {', '.join(missing)})", "grid"
        )
    try:
        return [
            GridCell(m=run.option("rows"), n=run.option("cols"), r=rank, p=run.option("samples"))
            for rank in run.option("rank")
        ]
    except PydanticValidationError as e:
        raise ValidationError(f"Celda inválida: {e.errors()[0].get('msg')}", "rank")


def cmd_benchmark(run: RunConfig) -> int:
    grid = _grid_from_flags(run)
    with measure_resources("benchmark", {'profile': run.profile}):
        rows = run_benchmark(
            grid, run.option("trials"), run.solver_config(), base_seed=run.option("seed", 0),
            jobs=run.option("jobs", 1),
        )
    if run.option("out"):
        write_benchmark_csv(rows, run.option("out"))
        logger.info(f"💾 Tabla escrita en {run.option('out')}")
    else:
        write_benchmark_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_inpaint(run: RunConfig) -> int:
    spec = MaskSpec(
        masked_fraction=run.option("mask_fraction", 0.5), seed=run.option("seed", 0),
        mask_path=run.option("mask_file"),
    )
    _, report = inpaint(
        run.option("image"), spec, profile=run.profile, output_path=run.option("out"),
        original_path=run.option("original"), truncate=run.option("truncate_rank"),
        config=run.solver_config(),
    )
    print(report.to_text(), end="")
    return EXIT_OK


def cmd_eval_nmae(run: RunConfig) -> int:
    report = eval_nmae(
        run.option("ratings"), holdout_per_user=run.option("holdout", 2), seed=run.option("seed", 0),
        profile=run.profile, r_min=run.option("rating_min"), r_max=run.option("rating_max"),
        config=run.solver_config(),
    )
    log_metrics("nmae", report.nmae, {'profile': run.profile, 'rank': report.rank})
    print(json.dumps({
        'nmae': report.nmae, 'mae': report.mae, 'rank': report.rank,
        'sigma_max': report.sigma_max, 'sigma_min': report.sigma_min,
        'users_evaluated': report.users_evaluated, 'users_excluded': report.users_excluded,
        'seconds': report.elapsed_seconds,
    }))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "benchmark": cmd_benchmark,
    "inpaint": cmd_inpaint,
    "eval-nmae": cmd_eval_nmae,
}


def dispatch(run: RunConfig) -> int:
    logger.debug(f"Subcomando {run.subcommand}, perfil {run.profile}, overrides {run.overrides}")
    return COMMANDS[run.subcommand](run)
