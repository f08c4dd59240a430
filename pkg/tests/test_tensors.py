import numpy as np
import pytest

from core import scalar, tensors
from utils.errors import DegeneracyError


def polar_metric(x):
    return scalar.stack([scalar.stack([1.0, 0.0]), scalar.stack([0.0, x[0] * x[0]])])


def sphere_metric(x):
    return scalar.stack([scalar.stack([1.0, 0.0]), scalar.stack([0.0, scalar.sin(x[0]) ** 2])])


def test_levi_civita_polar_plane():
    r = 1.7
    gamma = tensors.levi_civita(polar_metric(scalar.lift([r, 0.3], order=1))).value
    expected = np.zeros((2, 2, 2))
    expected[0, 1, 1] = -r
    expected[1, 0, 1] = expected[1, 1, 0] = 1.0 / r
    assert np.allclose(gamma, expected)


def test_flat_polar_curvature_vanishes():
    gamma = tensors.levi_civita(polar_metric(scalar.lift([1.3, 0.2], order=2)))
    assert np.allclose(tensors.curvature_of_connection(gamma), 0.0, atol=1e-12)


def test_round_sphere_curvature():
    theta = 0.9
    gamma = tensors.levi_civita(sphere_metric(scalar.lift([theta, 0.4], order=2)))
    R = tensors.curvature_of_connection(gamma)
    assert np.isclose(R[0, 1, 0, 1], np.sin(theta) ** 2)
    assert np.isclose(R[0, 1, 1, 0], -np.sin(theta) ** 2)
    lowered = tensors.lower_curvature(R, np.diag([1.0, np.sin(theta) ** 2]))
    residuals = tensors.curvature_symmetry_residuals(lowered)
    assert max(residuals.values()) < 1e-12


def test_first_bianchi_of_sphere():
    gamma = tensors.levi_civita(sphere_metric(scalar.lift([1.1, 0.0], order=2)))
    assert np.allclose(tensors.first_bianchi(tensors.curvature_of_connection(gamma)), 0.0, atol=1e-12)


def test_levi_civita_needs_derivatives():
    with pytest.raises(ValueError):
        tensors.levi_civita(scalar.constant(np.eye(2), 2, 0))


def test_signature_and_rank():
    assert tensors.signature(np.diag([-1.0, 1.0, 1.0])) == (1, 0, 2)
    assert tensors.signature(np.diag([0.0, 2.0, -3.0])) == (1, 1, 1)
    assert tensors.numerical_rank(np.diag([0.0, 1.0, 1e-12])) == 1
    assert tensors.numerical_rank(np.zeros((2, 2))) == 0


def test_check_nondegenerate():
    tensors.check_nondegenerate(np.diag([-1.0, 1.0]))
    with pytest.raises(DegeneracyError):
        tensors.check_nondegenerate(np.diag([0.0, 1.0]))


def test_inner_with_jets():
    x = scalar.lift([1.0, 2.0], order=1)
    value = tensors.inner(np.diag([-1.0, 1.0]), x, x)
    assert np.isclose(value.value, 3.0)
    assert np.allclose(value.grad, [-2.0, 4.0])
