"""
Lectura y escritura de matrices.

Formato de coordenadas (UTF-8):

    m n
    i j valor
    ...

con índices base 0 y valores con 17 dígitos significativos. Las líneas
vacías y las que empiezan por '#' se ignoran. También se acepta CSV denso
(una fila de la matriz por línea, separada por comas).
"""

import logging
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from ..numerics.linalg import ensure_matrix
from ..numerics.operators import EntryMask
from ..utils.error_handler import InputFormatError, ValidationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
VALUE_FORMAT = "%.17g"


def _content_lines(path: PathLike) -> Iterator[Tuple[int, str]]:
    with open(path, 'r', encoding='utf-8') as handle:
        for number, raw in enumerate(handle, start=1):
            line = raw.strip()
            if line and not line.startswith('#'):
                yield number, line


def _parse_float(text: str, path: PathLike, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputFormatError(f"valor no numérico '{text}'", str(path), line)
    if not np.isfinite(value):
        raise InputFormatError(f"valor no finito '{text}'", str(path), line)
    return value


def _parse_index(text: str, limit: int, path: PathLike, line: int) -> int:
    try:
        index = int(text)
    except ValueError:
        raise InputFormatError(f"índice no entero '{text}'", str(path), line)
    if not 0 <= index < limit:
        raise InputFormatError(f"índice {index} fuera de rango [0, {limit})", str(path), line)
    return index


def read_coordinates(path: PathLike) -> Tuple[Tuple[int, int], np.ndarray, np.ndarray, np.ndarray]:
    """
    Lee un archivo de coordenadas.

    Returns:
        ((m, n), filas, columnas, valores) en el orden del archivo

    Raises:
        InputFormatError: línea mal formada, índice fuera de rango o entrada duplicada
    """
    lines = _content_lines(path)
    header = next(lines, None)
    if header is None:
        raise InputFormatError("archivo vacío", str(path), 1)
    header_line, header_text = header
    parts = header_text.split()
    if len(parts) != 2:
        raise InputFormatError(f"cabecera 'm n' esperada, recibido '{header_text}'", str(path), header_line)
    try:
        m, n = int(parts[0]), int(parts[1])
    except ValueError:
        raise InputFormatError(f"cabecera 'm n' esperada, recibido '{header_text}'", str(path), header_line)
    if m < 1 or n < 1:
        raise InputFormatError(f"dimensiones inválidas {m}x{n}", str(path), header_line)

    rows: List[int] = []
    cols: List[int] = []
    values: List[float] = []
    seen = {}
    for number, text in lines:
        parts = text.split()
        if len(parts) != 3:
            raise InputFormatError(f"se esperaba 'i j valor', recibido '{text}'", str(path), number)
        i = _parse_index(parts[0], m, path, number)
        j = _parse_index(parts[1], n, path, number)
        if (i, j) in seen:
            raise InputFormatError(
                f"entrada ({i}, {j}) duplicada (ya en la línea {seen[(i, j)]})", str(path), number
            )
        seen[(i, j)] = number
        rows.append(i)
        cols.append(j)
        values.append(_parse_float(parts[2], path, number))

    return (m, n), np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp), np.array(values)


def read_dense_csv(path: PathLike) -> np.ndarray:
    rows: List[List[float]] = []
    width: Optional[int] = None
    for number, text in _content_lines(path):
        fields = [field.strip() for field in text.split(',')]
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise InputFormatError(f"fila con {len(fields)} columnas, se esperaban {width}", str(path), number)
        rows.append([_parse_float(field, path, number) for field in fields])
    if not rows:
        raise InputFormatError("archivo vacío", str(path), 1)
    return np.array(rows)


def _is_dense_csv(path: PathLike) -> bool:
    first = next(_content_lines(path), None)
    return first is not None and ',' in first[1]


def load_matrix(path: PathLike) -> np.ndarray:
    """Lee una matriz densa de un archivo de coordenadas (entradas ausentes = 0) o CSV."""
    if _is_dense_csv(path):
        return read_dense_csv(path)
    shape, rows, cols, values = read_coordinates(path)
    X = np.zeros(shape)
    X[rows, cols] = values
    return X


def load_observations(path: PathLike) -> Tuple[EntryMask, np.ndarray]:
    """
    Lee datos de completación: Omega = entradas listadas (en orden de archivo), b = sus valores.
    Un CSV denso se interpreta como totalmente observado.
    """
    if _is_dense_csv(path):
        X = read_dense_csv(path)
        mask = EntryMask.full(X.shape)
        return mask, X[mask.rows, mask.cols].copy()
    shape, rows, cols, values = read_coordinates(path)
    if rows.size == 0:
        raise InputFormatError("el archivo no contiene observaciones", str(path))
    return EntryMask(shape, rows, cols), values


def store_matrix(path: PathLike, X, fmt: str = "coordinate") -> None:
    """Escribe X completa en formato de coordenadas o CSV denso."""
    X = ensure_matrix(X, "X")
    m, n = X.shape
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        if fmt == "csv":
            for row in X:
                handle.write(",".join(VALUE_FORMAT % value for value in row) + "\n")
        elif fmt == "coordinate":
            handle.write(f"{m} {n}\n")
            for i in range(m):
                for j in range(n):
                    handle.write(f"{i} {j} {VALUE_FORMAT % X[i, j]}\n")
        else:
            raise ValidationError(f"Formato desconocido '{fmt}' (coordinate | csv)", "fmt")
    logger.debug(f"Matriz {m}x{n} escrita en {path} ({fmt})")


def store_observations(path: PathLike, mask: EntryMask, b) -> None:
    """Escribe las entradas observadas (Omega, b) en formato de coordenadas."""
    b = np.asarray(b, dtype=float)
    if b.shape != (mask.p,):
        raise ValidationError(f"b debe tener longitud {mask.p}", "b")
    m, n = mask.shape
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(f"{m} {n}\n")
        for i, j, value in zip(mask.rows, mask.cols, b):
            handle.write(f"{i} {j} {VALUE_FORMAT % value}\n")


def load_store_matrix(path: PathLike, direction: str, X=None, fmt: str = "coordinate") -> Optional[np.ndarray]:
    """direction='load' devuelve la matriz; direction='store' escribe X."""
    if direction == "load":
        return load_matrix(path)
    if direction == "store":
        if X is None:
            raise ValidationError("store requiere una matriz", "X")
        store_matrix(path, X, fmt)
        return None
    raise ValidationError(f"direction debe ser 'load' o 'store', recibido '{direction}'", "direction")
