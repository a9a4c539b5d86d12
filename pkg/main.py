import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv

# Agregar la raíz del repositorio al path de Python
sys.path.append(str(Path(__file__).parent))

from src.cli.commands import dispatch, parse_run_config
from src.utils.config_validator import ConfigValidator
from src.utils.error_handler import (
    EXIT_INVALID_INPUT,
    EXIT_UNEXPECTED,
    describe_error,
    exit_code_for,
    log_error_with_context,
)
from src.utils.logging_config import log_metrics, setup_logging

logger = logging.getLogger("src.main")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Punto de entrada de la CLI; devuelve el código de salida."""
    # Cargar variables de entorno desde .env
    load_dotenv()

    validation_result = ConfigValidator.validate_configuration()
    if not validation_result.is_valid:
        print("❌ CONFIGURACIÓN INVÁLIDA", file=sys.stderr)
        for error in validation_result.invalid_values:
            print(f"   - Valor inválido: {error}", file=sys.stderr)
        return EXIT_INVALID_INPUT

    try:
        run = parse_run_config(argv, validation_result.values)
    except SystemExit as e:
        # argparse ya imprimió el uso
        return EXIT_INVALID_INPUT if e.code else 0
    except Exception as e:
        print(describe_error(e), file=sys.stderr)
        return exit_code_for(e)

    setup_logging(
        log_level=run.log_level,
        log_dir=validation_result.values.get("FPC_LOG_DIR") or None,
        json_log_path=run.log_path,
    )
    for warning in validation_result.warnings:
        logger.warning(f"⚠️ {warning}")

    try:
        logger.info(f"🚀 fpc {run.subcommand} (perfil {run.profile})")
        exit_code = dispatch(run)
        log_metrics("command_exit", exit_code, {"subcommand": run.subcommand})
        return exit_code
    except KeyboardInterrupt:
        logger.info("🛑 Interrumpido por el usuario")
        return EXIT_UNEXPECTED
    except Exception as e:
        exit_code = exit_code_for(e)
        log_error_with_context(e, {"subcommand": run.subcommand, "profile": run.profile}, run.subcommand)
        print(describe_error(e, include_details=exit_code == EXIT_UNEXPECTED), file=sys.stderr)
        log_metrics("command_exit", exit_code, {"subcommand": run.subcommand, "error_type": type(e).__name__})
        return exit_code


if __name__ == "__main__":
    sys.exit(main())
