#!/usr/bin/env python3
"""
Pruebas de los mapas de medición: adjunto, gradiente y constante de Lipschitz.
"""

import sys
import logging
from pathlib import Path

import numpy as np
import pytest
import scipy.linalg

sys.path.append(str(Path(__file__).parent))

from src.numerics.operators import EntryMask, ExplicitAffine, gradient, lipschitz_bound
from src.utils.error_handler import ValidationError

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def _random_mask(rng, shape, p):
    linear = np.sort(rng.choice(shape[0] * shape[1], size=p, replace=False))
    return EntryMask(shape, linear // shape[1], linear % shape[1])


def test_entry_mask_adjoint_identity():
    rng = np.random.default_rng(0)
    for _ in range(500):
        mask = _random_mask(rng, (7, 5), 12)
        X = rng.standard_normal((7, 5))
        y = rng.standard_normal(12)
        assert abs(mask.apply(X) @ y - np.sum(X * mask.adjoint(y))) <= 1e-10


def test_explicit_affine_adjoint_identity():
    rng = np.random.default_rng(1)
    for _ in range(500):
        affine = ExplicitAffine((4, 6), rng.standard_normal((10, 24)))
        X = rng.standard_normal((4, 6))
        y = rng.standard_normal(10)
        assert abs(affine.apply(X) @ y - np.sum(X * affine.adjoint(y))) <= 1e-10


def test_explicit_affine_uses_column_major_vec():
    X = np.arange(6, dtype=float).reshape(2, 3)
    identity = ExplicitAffine((2, 3), np.eye(6))
    np.testing.assert_array_equal(identity.apply(X), [0.0, 3.0, 1.0, 4.0, 2.0, 5.0])
    np.testing.assert_array_equal(identity.adjoint(identity.apply(X)), X)


def test_entry_mask_rejects_duplicates_and_out_of_range():
    with pytest.raises(ValidationError):
        EntryMask((3, 3), [0, 0], [1, 1])
    with pytest.raises(ValidationError):
        EntryMask((3, 3), [0, 3], [0, 0])
    with pytest.raises(ValidationError):
        EntryMask((3, 3), [], [])


def test_entry_mask_is_a_partial_isometry():
    rng = np.random.default_rng(2)
    mask = _random_mask(rng, (6, 6), 20)
    y = rng.standard_normal(20)
    np.testing.assert_array_equal(mask.apply(mask.adjoint(y)), y)
    assert lipschitz_bound(mask) == 1.0


def test_from_boolean_is_row_major():
    mask = EntryMask.from_boolean(np.array([[False, True], [True, False]]))
    np.testing.assert_array_equal(mask.rows, [0, 1])
    np.testing.assert_array_equal(mask.cols, [1, 0])
    np.testing.assert_array_equal(mask.to_boolean(), [[False, True], [True, False]])


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    for measurement_map in (_random_mask(rng, (5, 4), 9),
                            ExplicitAffine((5, 4), rng.standard_normal((9, 20)))):
        b = rng.standard_normal(9)

        def f(Z):
            return 0.5 * np.linalg.norm(measurement_map.apply(Z) - b) ** 2

        h = 1e-5
        for _ in range(10):
            X = rng.standard_normal((5, 4))
            D = rng.standard_normal((5, 4))
            numeric = (f(X + h * D) - f(X - h * D)) / (2 * h)
            analytic = np.sum(gradient(measurement_map, X, b) * D)
            assert abs(numeric - analytic) <= 1e-5 * max(1.0, abs(analytic))


def test_explicit_affine_lipschitz_bound():
    coefficients = np.random.default_rng(4).standard_normal((15, 12))
    sigma = scipy.linalg.svdvals(coefficients)[0]
    bound = ExplicitAffine((3, 4), coefficients).lipschitz_bound()
    assert sigma ** 2 <= bound <= 1.02 * sigma ** 2


def test_rank_one_columns_match_apply():
    rng = np.random.default_rng(5)
    U = rng.standard_normal((4, 2))
    V = rng.standard_normal((3, 2))
    for measurement_map in (_random_mask(rng, (4, 3), 7),
                            ExplicitAffine((4, 3), rng.standard_normal((8, 12)))):
        B = measurement_map.rank_one_columns(U, V)
        for i in range(2):
            np.testing.assert_allclose(B[:, i], measurement_map.apply(np.outer(U[:, i], V[:, i])),
                                       atol=1e-12)


def test_shape_mismatch_is_rejected():
    mask = EntryMask.full((2, 2))
    with pytest.raises(ValidationError):
        mask.apply(np.zeros((3, 2)))
    with pytest.raises(ValidationError):
        mask.adjoint(np.zeros(3))
    with pytest.raises(ValidationError):
        ExplicitAffine((2, 2), np.ones((3, 5)))


def main():
    """Ejecuta las pruebas de este archivo sin pytest."""
    tests = [(name, func) for name, func in globals().items() if name.startswith("test_")]
    passed = 0
    for name, func in tests:
        try:
            func()
            passed += 1
            logger.info(f"✅ {name} PASÓ")
        except Exception as e:
            logger.error(f"❌ {name} FALLÓ: {e}")
    logger.info(f"📊 {passed}/{len(tests)} pruebas pasaron")
    return 0 if passed == len(tests) else 1


if __name__ == "__main__":
    sys.exit(main())
