"""
Inpainting de imágenes en grises como completación de matrices.

Los píxeles observados forman Omega, el solver completa la matriz y la
reconstrucción se cuantiza sólo al escribirla.
"""

import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ..numerics.linalg import SvdFactors, full_svd
from ..numerics.operators import EntryMask
from ..problems.benchmark import solve_with_profile
from ..problems.metrics import rel_error
from ..solvers.config import SolverConfig, get_profile
from ..utils.error_handler import ValidationError
from .image_io import MaskedImage, load_mask_file, random_mask, read_pgm, write_pgm

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class MaskSpec:
    """Fracción aleatoria oculta (con semilla) o archivo de máscara."""
    masked_fraction: float = 0.5
    seed: int = 0
    mask_path: Optional[str] = None

    def build(self, shape: Tuple[int, int]) -> np.ndarray:
        if self.mask_path is not None:
            return load_mask_file(self.mask_path, shape)
        return random_mask(shape, self.masked_fraction, self.seed)


@dataclass(frozen=True)
class InpaintReport:
    width: int
    height: int
    observed_fraction: float
    profile: str
    rel_err: Optional[float]
    rank: int
    elapsed_seconds: float
    solver_skipped: bool = False

    def to_text(self) -> str:
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, float):
                value = f"{value:.6e}"
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def truncate_rank(image: np.ndarray, k: int) -> np.ndarray:
    """Mejor aproximación de rango k (SVD truncada)."""
    if k < 1:
        raise ValidationError(f"k debe ser >= 1, recibido {k}", "k")
    factors = full_svd(image)
    k = min(k, factors.rank)
    truncated = SvdFactors(factors.U[:, :k], factors.sigma[:k], factors.V[:, :k])
    return truncated.reconstruct()


def complete_image(masked: MaskedImage, config: SolverConfig) -> Tuple[np.ndarray, int, bool]:
    """
    Completa la imagen.

    Returns:
        (reconstrucción en float, rango final, True si no hizo falta resolver)
    """
    if masked.mask.all():
        return masked.pixels.copy(), full_svd(masked.pixels).rank, True
    measurement_map = EntryMask.from_boolean(masked.mask)
    b = masked.pixels[measurement_map.rows, measurement_map.cols]
    report = solve_with_profile(measurement_map, b, config)
    return report.X_opt, report.final_rank, False


def inpaint(image_path: PathLike, mask_spec: MaskSpec, profile: str = "fpca",
            output_path: Optional[PathLike] = None, original_path: Optional[PathLike] = None,
            truncate: Optional[int] = None,
            config: Optional[SolverConfig] = None) -> Tuple[np.ndarray, InpaintReport]:
    """
    Ejecuta el pipeline de inpainting.

    Args:
        image_path: PGM de entrada
        mask_spec: Máscara aleatoria o archivo de máscara
        profile: Perfil del solver
        output_path: PGM de salida; el informe se escribe junto a él con sufijo .txt
        original_path: Imagen de referencia para rel.err (por defecto la entrada)
        truncate: Si se da, la entrada se reduce primero a ese rango
        config: Configuración explícita (tiene prioridad sobre profile)

    Returns:
        (reconstrucción en float, informe)
    """
    config = config or get_profile(profile)
    pixels, bit_depth = read_pgm(image_path)
    if truncate is not None:
        pixels = np.clip(truncate_rank(pixels, truncate), 0.0, 1.0)
        logger.info(f"Imagen reducida a rango {truncate}")

    masked = MaskedImage(pixels=pixels, mask=mask_spec.build(pixels.shape), bit_depth=bit_depth)
    logger.info(
        f"🖼️ Inpainting {masked.width}x{masked.height}, "
        f"{masked.observed_fraction:.1%} observado, perfil {profile}"
    )

    start = time.perf_counter()
    reconstruction, rank, skipped = complete_image(masked, config)
    elapsed = time.perf_counter() - start

    reference = read_pgm(original_path)[0] if original_path is not None else pixels
    error = rel_error(reconstruction, reference) if np.any(reference) else None

    report = InpaintReport(
        width=masked.width,
        height=masked.height,
        observed_fraction=masked.observed_fraction,
        profile=profile,
        rel_err=error,
        rank=rank,
        elapsed_seconds=elapsed,
        solver_skipped=skipped,
    )

    if output_path is not None:
        write_pgm(output_path, reconstruction, bit_depth)
        Path(output_path).with_suffix(".txt").write_text(report.to_text(), encoding='utf-8')
        logger.info(f"💾 Reconstrucción escrita en {output_path}")

    if error is not None:
        logger.info(f"✅ Inpainting completado: rel.err = {error:.3e}, rango {rank}, {elapsed:.2f}s")
    return reconstruction, report
