"""Línea de comandos y E/S de archivos (matrices, imágenes, ratings)."""

from .commands import COMMANDS, RunConfig, build_parser, dispatch, parse_run_config
from .image_io import MaskedImage, read_pgm, write_pgm
from .inpaint import InpaintReport, MaskSpec, inpaint, truncate_rank
from .matrix_io import load_matrix, load_observations, load_store_matrix, store_matrix, store_observations
from .ratings import NmaeReport, eval_nmae

__all__ = [
    'COMMANDS', 'RunConfig', 'build_parser', 'dispatch', 'parse_run_config',
    'MaskedImage', 'read_pgm', 'write_pgm',
    'InpaintReport', 'MaskSpec', 'inpaint', 'truncate_rank',
    'load_matrix', 'load_observations', 'load_store_matrix', 'store_matrix', 'store_observations',
    'NmaeReport', 'eval_nmae',
]
