import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import scalar
from core.oracle import fd_gradient, fd_hessian
from core.scalar import DScalar

coords = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False, allow_infinity=False)


def test_lift_seeds_identity_gradient():
    x = scalar.lift([0.5, -1.0, 2.0], order=2)
    assert x.shape == (3,)
    assert np.allclose(x.grad, np.eye(3))
    assert np.allclose(x.hess, 0.0)


def test_lift_with_inactive_coordinates():
    x = scalar.lift([1.0, 2.0, 3.0], active=[2], order=1)
    assert x.nvars == 1
    assert np.allclose(x.grad[:, 0], [0.0, 0.0, 1.0])


def test_lift_rejects_bad_order():
    with pytest.raises(ValueError):
        scalar.lift([1.0], order=4)


def test_polynomial_derivatives_up_to_third_order():
    a, b = 0.7, -1.3
    x = scalar.lift([a, b], order=3)
    f = x[0] * x[0] * x[1]
    assert np.isclose(f.value, a * a * b)
    assert np.allclose(f.grad, [2 * a * b, a * a])
    assert np.allclose(f.hess, [[2 * b, 2 * a], [2 * a, 0.0]])
    third = np.zeros((2, 2, 2))
    third[0, 0, 1] = third[0, 1, 0] = third[1, 0, 0] = 2.0
    assert np.allclose(f.third, third)


def test_partial_lowers_order():
    x = scalar.lift([0.3, 0.4], order=3)
    f = x[0] * x[1] * x[1]
    df = f.partial(1)
    assert df.order == 2
    assert np.isclose(df.value, 2 * 0.3 * 0.4)
    assert np.allclose(df.grad, [2 * 0.4, 2 * 0.3])


def test_partial_of_value_only_raises():
    with pytest.raises(ValueError):
        scalar.constant(1.0, 2, 0).partial(0)


def test_mixed_order_arithmetic_truncates():
    x = scalar.lift([1.0, 2.0], order=3)
    y = scalar.lift([1.0, 2.0], order=1)
    assert (x * y).order == 1


def test_stack_mixes_constants_and_jets():
    x = scalar.lift([0.2, 0.3], order=2)
    m = scalar.stack([scalar.stack([1.0, x[0]]), scalar.stack([x[1], 0.0])])
    assert m.shape == (2, 2)
    assert np.allclose(m.value, [[1.0, 0.2], [0.3, 0.0]])
    assert np.allclose(m.grad[0, 0], 0.0)
    assert np.allclose(m.grad[0, 1], [1.0, 0.0])


def test_einsum_with_constant_operand():
    x = scalar.lift([1.0, 2.0], order=1)
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    y = scalar.einsum("ij,j->i", A, x)
    assert np.allclose(y.value, A @ [1.0, 2.0])
    assert np.allclose(y.grad, A)


def test_matmul_delegates_to_einsum():
    x = scalar.lift([1.0, 2.0], order=1)
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    y = A @ x
    assert isinstance(y, DScalar)
    assert np.allclose(y.value, [2.0, 1.0])


def test_elementary_functions_accept_floats():
    assert np.isclose(scalar.sin(0.5), np.sin(0.5))
    assert np.isclose(scalar.sqrt(4.0), 2.0)


def test_nvars_mismatch_raises():
    with pytest.raises(ValueError):
        scalar.lift([1.0, 2.0]) + scalar.lift([1.0, 2.0, 3.0])


def test_getitem_rejects_ellipsis():
    with pytest.raises(IndexError):
        scalar.lift([1.0, 2.0])[...]


@settings(max_examples=40, deadline=None)
@given(coords, coords)
def test_composite_function_matches_oracle(a, b):
    def f(v):
        return scalar.sin(v[0]) * scalar.exp(v[1]) + v[0] * v[1] * v[1] + scalar.cosh(v[0] - v[1])

    point = np.array([a, b])
    jet = f(scalar.lift(point, order=2))
    assert np.allclose(jet.grad, fd_gradient(f, point), atol=1e-7)
    assert np.allclose(jet.hess, fd_hessian(f, point), atol=1e-5)


@settings(max_examples=30, deadline=None)
@given(coords, coords)
def test_matrix_inverse_derivatives_match_oracle(a, b):
    def matrix(v):
        return scalar.stack([scalar.stack([3.0 + v[0], v[1]]), scalar.stack([v[1], 4.0 - v[0] * v[0]])])

    point = np.array([a, b])
    jet = scalar.inv(matrix(scalar.lift(point, order=2)))
    assert np.allclose(jet.value, np.linalg.inv(matrix(point)))
    assert np.allclose(jet.grad, fd_gradient(lambda v: np.linalg.inv(matrix(v)), point), atol=1e-7)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.2, max_value=3.0), st.floats(min_value=-2.0, max_value=2.0))
def test_power_and_quotient_match_oracle(a, b):
    def f(v):
        return v[0] ** 1.5 / (1.0 + v[1] * v[1]) + scalar.log(v[0])

    point = np.array([a, b])
    jet = f(scalar.lift(point, order=2))
    assert np.allclose(jet.grad, fd_gradient(f, point), atol=1e-7)
