"""
Mapa lineal de medición A: R^{m x n} -> R^p, su adjunto y el gradiente
de f(X) = 1/2 ||A(X) - b||^2.

Dos variantes:
- EntryMask: selecciona las entradas observadas Omega (completación de matrices).
- ExplicitAffine: matriz de coeficientes p x (m n) aplicada a vec(X) en orden
  por columnas (se apilan las columnas de X).
"""

import logging
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from ..utils.error_handler import ValidationError
from .linalg import ensure_matrix, spectral_norm

logger = logging.getLogger(__name__)

# Factor de seguridad sobre sigma_1(A)^2 estimado por iteración de potencia
LIPSCHITZ_SAFETY = 1.01
LIPSCHITZ_TOL = 1e-6


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class MeasurementMap(ABC):
    """Mapa lineal de medición inmutable."""

    def __init__(self, shape: Tuple[int, int]):
        m, n = (int(shape[0]), int(shape[1]))
        if m < 1 or n < 1:
            raise ValidationError(f"Dimensiones inválidas para el mapa: {shape}", "shape")
        self._shape = (m, n)

    @property
    def shape(self) -> Tuple[int, int]:
        return self._shape

    @property
    @abstractmethod
    def p(self) -> int:
        """Número de mediciones."""

    @abstractmethod
    def _apply(self, X: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _adjoint(self, y: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def lipschitz_bound(self) -> float:
        """Cota de lambda_max(A^T A)."""

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape != self._shape:
            raise ValidationError(
                f"La matriz tiene forma {X.shape}, el mapa espera {self._shape}", "X"
            )
        return self._apply(X)

    def adjoint(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.p,):
            raise ValidationError(
                f"El vector tiene longitud {y.shape}, el mapa espera ({self.p},)", "y"
            )
        return self._adjoint(y)

    def rank_one_columns(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Matriz p x r cuyas columnas son A(u_i v_i^T)."""
        r = U.shape[1]
        B = np.empty((self.p, r))
        for i in range(r):
            B[:, i] = self._apply(np.outer(U[:, i], V[:, i]))
        return B


class EntryMask(MeasurementMap):
    """
    Operador de selección sobre Omega, una secuencia ordenada de pares
    (fila, columna) distintos. A A^* = I.
    """

    def __init__(self, shape: Tuple[int, int], rows: Sequence[int], cols: Sequence[int]):
        super().__init__(shape)
        m, n = self._shape
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        if rows.ndim != 1 or rows.shape != cols.shape:
            raise ValidationError("rows y cols deben ser secuencias 1-D de igual longitud", "omega")
        if rows.size < 1:
            raise ValidationError("Omega debe contener al menos una entrada", "omega")
        if not (np.issubdtype(rows.dtype, np.integer) and np.issubdtype(cols.dtype, np.integer)):
            raise ValidationError("Los índices de Omega deben ser enteros", "omega")
        rows = rows.astype(np.intp)
        cols = cols.astype(np.intp)
        if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
            raise ValidationError(f"Índices de Omega fuera de rango para forma {self._shape}", "omega")
        linear = rows * n + cols
        unique, counts = np.unique(linear, return_counts=True)
        if unique.size != linear.size:
            dup = int(unique[np.argmax(counts > 1)])
            raise ValidationError(
                f"Omega contiene entradas duplicadas, p.ej. ({dup // n}, {dup % n})", "omega"
            )
        self.rows = _readonly(rows)
        self.cols = _readonly(cols)

    @classmethod
    def from_boolean(cls, observed: np.ndarray) -> "EntryMask":
        """Omega en orden por filas a partir de una máscara booleana."""
        observed = np.asarray(observed, dtype=bool)
        rows, cols = np.nonzero(observed)
        return cls(observed.shape, rows, cols)

    @classmethod
    def full(cls, shape: Tuple[int, int]) -> "EntryMask":
        return cls.from_boolean(np.ones(shape, dtype=bool))

    @property
    def p(self) -> int:
        return int(self.rows.size)

    @property
    def pairs(self) -> np.ndarray:
        return np.column_stack([self.rows, self.cols])

    def to_boolean(self) -> np.ndarray:
        observed = np.zeros(self._shape, dtype=bool)
        observed[self.rows, self.cols] = True
        return observed

    def _apply(self, X: np.ndarray) -> np.ndarray:
        return X[self.rows, self.cols]

    def _adjoint(self, y: np.ndarray) -> np.ndarray:
        Z = np.zeros(self._shape)
        Z[self.rows, self.cols] = y
        return Z

    def rank_one_columns(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        return U[self.rows, :] * V[self.cols, :]

    def lipschitz_bound(self) -> float:
        return 1.0


class ExplicitAffine(MeasurementMap):
    """Mapa general A vec(X) con vec por columnas."""

    def __init__(self, shape: Tuple[int, int], coefficients):
        super().__init__(shape)
        m, n = self._shape
        coefficients = ensure_matrix(coefficients, "coefficients")
        if coefficients.shape[1] != m * n:
            raise ValidationError(
                f"La matriz de coeficientes debe tener {m * n} columnas, tiene {coefficients.shape[1]}",
                "coefficients",
            )
        self.coefficients = _readonly(np.array(coefficients))

    @property
    def p(self) -> int:
        return int(self.coefficients.shape[0])

    def _apply(self, X: np.ndarray) -> np.ndarray:
        return self.coefficients @ X.reshape(-1, order='F')

    def _adjoint(self, y: np.ndarray) -> np.ndarray:
        return (self.coefficients.T @ y).reshape(self._shape, order='F')

    def rank_one_columns(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        # vec(u v^T) = kron(v, u) en orden por columnas
        r = U.shape[1]
        B = np.empty((self.p, r))
        for i in range(r):
            B[:, i] = self.coefficients @ np.kron(V[:, i], U[:, i])
        return B

    @cached_property
    def _lipschitz(self) -> float:
        sigma = spectral_norm(self.coefficients, tol=LIPSCHITZ_TOL)
        return LIPSCHITZ_SAFETY * sigma * sigma

    def lipschitz_bound(self) -> float:
        return self._lipschitz


def apply(measurement_map: MeasurementMap, X) -> np.ndarray:
    """A(X)."""
    return measurement_map.apply(X)


def adjoint(measurement_map: MeasurementMap, y) -> np.ndarray:
    """A^*(y)."""
    return measurement_map.adjoint(y)


def gradient(measurement_map: MeasurementMap, X, b) -> np.ndarray:
    """g(X) = A^*(A(X) - b)."""
    b = np.asarray(b, dtype=float)
    return measurement_map.adjoint(measurement_map.apply(X) - b)


def lipschitz_bound(measurement_map: MeasurementMap) -> float:
    """lambda_max(A^T A): 1 para EntryMask, 1.01 sigma_1(A)^2 para ExplicitAffine."""
    return measurement_map.lipschitz_bound()
