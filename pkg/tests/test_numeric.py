import numpy as np
import pytest

from xbnet import numeric
from xbnet.errors import ShapeError, ValidationError


def test_matmul_identity_is_bit_exact():
    b = np.array([[3.0], [4.0]])
    out = numeric.matmul(np.eye(2), b)
    assert np.array_equal(out, b)
    x = numeric.make_rng(3).standard_normal((5, 4))
    assert np.array_equal(numeric.matmul(np.eye(5), x), x)


def test_matmul_hand_product():
    out = numeric.matmul([[1, 2], [3, 4]], [[5], [6]])
    assert out.tolist() == [[17.0], [39.0]]


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 2\)"):
        numeric.matmul(np.ones((2, 3)), np.ones((2, 2)))


def test_matmul_associative():
    rng = numeric.make_rng(0)
    for _ in range(20):
        n, k, p, q = rng.integers(1, 7, size=4)
        A, B, C = rng.standard_normal((n, k)), rng.standard_normal((k, p)), rng.standard_normal((p, q))
        left = numeric.matmul(numeric.matmul(A, B), C)
        right = numeric.matmul(A, numeric.matmul(B, C))
        np.testing.assert_allclose(left, right, rtol=1e-9, atol=1e-12)


def test_add_bias_rows():
    z = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(numeric.add_bias_rows(z, [[0.0], [0.0]]), z)
    assert numeric.add_bias_rows([[1.0, 2.0]], [[10.0]]).tolist() == [[11.0, 12.0]]
    with pytest.raises(ShapeError):
        numeric.add_bias_rows(np.ones((2, 2)), np.ones((3, 1)))


def test_elementwise():
    assert numeric.elementwise([[1.0]], [[2.0]], "add").tolist() == [[3.0]]
    assert numeric.elementwise([[2.0, 3.0]], [[4.0, 5.0]], "mul").tolist() == [[8.0, 15.0]]
    with pytest.raises(ShapeError):
        numeric.elementwise(np.ones((1, 2)), np.ones((2, 1)), "sub")


def test_non_finite_results_raise():
    with pytest.raises(ValidationError):
        numeric.elementwise([[1e308]], [[1e308]], "mul")


def test_rng_uniform_deterministic_and_bounded():
    a = numeric.rng_uniform(numeric.make_rng(42), 0.0, 1.0, (2, 2))
    b = numeric.rng_uniform(numeric.make_rng(42), 0.0, 1.0, (2, 2))
    assert np.array_equal(a, b)
    draws = numeric.rng_uniform(numeric.make_rng(7), 0.0, 1.0, (10_000,))
    assert 0.45 <= draws.mean() <= 0.55
    assert draws.min() >= 0.0 and draws.max() < 1.0


def test_rng_uniform_rejects_empty_interval():
    with pytest.raises(ValidationError):
        numeric.rng_uniform(numeric.make_rng(0), 1.0, 0.0, (2,))
