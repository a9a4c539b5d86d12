import argparse
import os
import sys
import logging
from pathlib import Path
from dotenv import load_dotenv

# Cargar variables de entorno
dotenv_path = Path(__file__).parent.parent / '.env'
load_dotenv(dotenv_path)

# Agregar el directorio raíz al path de Python
sys.path.append(str(Path(__file__).parent.parent))

from evals.evaluator import EASY_PROBLEMS, BenchmarkEvaluator
from src.utils.logging_config import setup_logging

logger = logging.getLogger("src.evals")


def run_reproduction_suite(trials: int, jobs: int, base_seed: int, results_file: str,
                           easy_problems: int = 3) -> bool:
    """
    Reproduce a escala de escritorio las tablas de recuperación aleatoria.
    """
    evaluator = BenchmarkEvaluator(results_file=results_file, base_seed=base_seed, jobs=jobs)

    print("🚀 Iniciando reproducción de tablas...")

    for profile in ("fpc1", "fpc2", "fpc3"):
        print(f"\n📋 m = n = 40, p = 800, {profile.upper()}:")
        evaluator.evaluate_table(f"small_{profile}", 40, 40, 800, range(1, 7), profile, trials)

    print("\n📋 m = n = 40, p = 800, FPCA:")
    evaluator.evaluate_table("small_fpca", 40, 40, 800, range(1, 12), "fpca", trials)

    print("\n📋 m = n = 100, p = 2000, FPCA:")
    evaluator.evaluate_table("medium_fpca", 100, 100, 2000, range(1, 11), "fpca", trials)

    print("\n🔁 Bregman vs FPC2 (r = 1):")
    evaluator.evaluate_bregman(trials)

    print("\n🧩 Problemas fáciles con fpca-easy:")
    evaluator.evaluate_fpca_easy(min(trials, 5), problems=EASY_PROBLEMS[:easy_problems])

    evaluator.save_results()
    report = evaluator.generate_report()

    print("\n" + "=" * 60)
    print("📊 REPORTE DE REPRODUCCIÓN")
    print("=" * 60)
    print(f"Experimentos: {report['total']}  Exitosos: {report['passed']}")
    for experiment_id, summary in report['experiments'].items():
        status = "✅" if summary['success'] else "❌"
        print(f"{status} {experiment_id} ({summary['execution_time']:.1f}s)")
        for mismatch in summary['mismatches']:
            print(f"     - {mismatch}")
    print("=" * 60)

    return report['passed'] == report['total']


def main():
    parser = argparse.ArgumentParser(description="Reproducción de las tablas de recuperación")
    parser.add_argument("--trials", type=int, default=10)
    parser.add_argument("--jobs", type=int, default=int(os.getenv("FPC_JOBS", "1")))
    parser.add_argument("--seed", type=int, default=int(os.getenv("FPC_BASE_SEED", "0")))
    parser.add_argument("--results", default=str(Path(__file__).parent / "results.json"))
    args = parser.parse_args()

    setup_logging(log_level=os.getenv("FPC_LOG_LEVEL", "INFO"))
    try:
        success = run_reproduction_suite(args.trials, args.jobs, args.seed, args.results)
        return 0 if success else 1
    except Exception as e:
        logger.error(f"💥 Error en la reproducción: {e}")
        return 1


if __name__ == "__main__":
    exit_code = main()
    sys.exit(exit_code)
