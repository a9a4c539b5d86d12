"""
Imágenes en escala de grises (portable graymap P2/P5, 8 o 16 bits) con Pillow.

Los píxeles se manejan como float en [0, 1]; la cuantización sólo ocurre
al escribir.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..utils.error_handler import InputFormatError, ValidationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MAX_VALUE = {8: 255, 16: 65535}
_SIXTEEN_BIT_MODES = {"I", "I;16", "I;16B", "I;16L"}


@dataclass(frozen=True, eq=False)
class MaskedImage:
    """Imagen con máscara de observación (True = píxel observado)."""
    pixels: np.ndarray
    mask: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise ValidationError(f"La imagen debe ser 2-D, recibido ndim={self.pixels.ndim}", "pixels")
        if self.mask.shape != self.pixels.shape:
            raise ValidationError(
                f"Máscara {self.mask.shape} no coincide con la imagen {self.pixels.shape}", "mask"
            )
        if not self.mask.any():
            raise ValidationError("La máscara no deja ningún píxel observado", "mask")
        if np.any(self.pixels < 0) or np.any(self.pixels > 1):
            raise ValidationError("Los píxeles deben estar en [0, 1]", "pixels")

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def observed_fraction(self) -> float:
        return float(self.mask.mean())


def read_pgm(path: PathLike) -> Tuple[np.ndarray, int]:
    """
    Lee un PGM y devuelve (píxeles en [0, 1], profundidad en bits).

    Raises:
        InputFormatError: si el archivo no es un graymap legible
    """
    try:
        with Image.open(path) as image:
            image.load()
            if image.format != "PPM":
                raise InputFormatError(f"se esperaba un portable graymap, recibido {image.format}", str(path))
            if image.mode == "L":
                depth = 8
            elif image.mode in _SIXTEEN_BIT_MODES:
                depth = 16
            else:
                raise InputFormatError(f"sólo se admiten imágenes en grises, modo {image.mode}", str(path))
            data = np.asarray(image, dtype=float)
    except (UnidentifiedImageError, SyntaxError, ValueError) as e:
        raise InputFormatError(f"imagen ilegible: {e}", str(path))
    return data / MAX_VALUE[depth], depth


def quantize(pixels: np.ndarray, bit_depth: int = 8) -> np.ndarray:
    """Recorta a [0, 1] y redondea a enteros de bit_depth bits."""
    if bit_depth not in MAX_VALUE:
        raise ValidationError(f"Profundidad no soportada: {bit_depth}", "bit_depth")
    scaled = np.rint(np.clip(pixels, 0.0, 1.0) * MAX_VALUE[bit_depth])
    return scaled.astype(np.uint8 if bit_depth == 8 else np.int32)


def write_pgm(path: PathLike, pixels: np.ndarray, bit_depth: int = 8) -> None:
    """Escribe un PGM binario (P5) de 8 o 16 bits."""
    image = Image.fromarray(quantize(pixels, bit_depth))
    image.save(path, format="PPM")
    logger.debug(f"Imagen {pixels.shape[1]}x{pixels.shape[0]} ({bit_depth} bits) escrita en {path}")


def random_mask(shape: Tuple[int, int], masked_fraction: float, seed: int) -> np.ndarray:
    """Máscara de observación con round(rho N) píxeles ocultos elegidos uniformemente."""
    if not 0.0 <= masked_fraction < 1.0:
        raise ValidationError(f"La fracción oculta debe estar en [0, 1), recibido {masked_fraction}", "mask")
    total = shape[0] * shape[1]
    hidden = int(round(masked_fraction * total))
    rng = np.random.Generator(np.random.PCG64(seed))
    observed = np.ones(total, dtype=bool)
    observed[rng.choice(total, size=hidden, replace=False)] = False
    return observed.reshape(shape)


def load_mask_file(path: PathLike, shape: Tuple[int, int]) -> np.ndarray:
    """Máscara desde un PGM: píxel no nulo = observado."""
    values, _ = read_pgm(path)
    if values.shape != tuple(shape):
        raise InputFormatError(f"la máscara mide {values.shape}, la imagen {tuple(shape)}", str(path))
    return values > 0
