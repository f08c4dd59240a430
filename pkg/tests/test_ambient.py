import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import scalar, tensors
from core.ambient import (
    AmbientManifold,
    ConstantMetric,
    Warp,
    WarpedProductMetric,
    ambient_cov_deriv,
    ambient_curvature,
    christoffel,
)
from core.catalog import get_entry
from tests.conftest import minkowski
from utils.errors import ConfigurationError, SignatureError

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])


def test_constant_metric_returns_jets_for_jets():
    metric = ConstantMetric(MINKOWSKI)
    jet = metric(scalar.lift(np.zeros(4), order=2))
    assert np.allclose(jet.value, MINKOWSKI)
    assert np.allclose(jet.grad, 0.0)


def test_constant_metric_must_be_symmetric():
    with pytest.raises(ConfigurationError):
        ConstantMetric([[1.0, 2.0], [0.0, 1.0]])


def test_warp_parse_and_spec():
    warp = Warp.parse("sin:2:1.0")
    assert warp == Warp("sin", 2, 1.0)
    assert Warp.parse(warp.spec()) == warp
    assert Warp.parse("one") == Warp()


def test_warp_rejects_unknown_function():
    with pytest.raises(ConfigurationError):
        Warp("bessel")


def test_warp_must_read_earlier_blocks():
    with pytest.raises(ConfigurationError):
        WarpedProductMetric([[[1.0]], [[1.0]]], [Warp("sin", 1), Warp()])


def test_warped_product_values():
    metric = WarpedProductMetric([[[-1.0, 0.0], [0.0, 1.0]], [[1.0]], [[1.0]]], [Warp(), Warp(), Warp("sin", 2)])
    assert metric.dim == 4
    assert np.allclose(metric(np.array([0.0, 0.0, 0.5, 0.0])), np.diag([-1.0, 1.0, 1.0, np.sin(0.5) ** 2]))


@pytest.mark.parametrize("dim,index", [(2, 1), (4, 0), (4, 4)])
def test_ambient_dimension_and_index_bounds(dim, index):
    with pytest.raises(ConfigurationError):
        AmbientManifold(dim=dim, index=index, metric_fn=ConstantMetric(np.eye(dim)))


def test_validate_point_checks_declared_index():
    wrong = AmbientManifold(dim=4, index=2, metric_fn=ConstantMetric(MINKOWSKI))
    with pytest.raises(SignatureError):
        wrong.validate_point(np.zeros(4))


def test_validate_point_checks_domain():
    m = AmbientManifold(dim=4, index=1, metric_fn=ConstantMetric(MINKOWSKI), chart_domain=lambda x: x[0] > 0)
    with pytest.raises(ConfigurationError):
        m.validate_point(np.zeros(4))


def test_flat_ambient_has_no_connection():
    m = minkowski()
    x = np.array([0.1, 0.2, 0.3, 0.4])
    assert np.allclose(christoffel(m, x), 0.0)
    assert np.allclose(ambient_curvature(m, x), 0.0)


def test_covariant_derivative_in_flat_space_is_directional_derivative():
    m = minkowski()
    v = ambient_cov_deriv(m, lambda x: scalar.stack([x[1] * x[1], 0.0, 0.0, x[0]]), np.array([0.0, 2.0, 0.0, 0.0]), [1.0, 1.0, 0.0, 0.0])
    assert np.allclose(v, [4.0, 0.0, 0.0, 1.0])


def test_sphere_factor_curvature():
    m = get_entry("nullline-x-sphere").ambient
    x = np.array([0.2, 0.2, 1.1, 0.5])
    R = ambient_curvature(m, x)
    assert np.isclose(R[2, 3, 2, 3], np.sin(1.1) ** 2)
    assert np.allclose(R[:2], 0.0)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=0.3, max_value=np.pi - 0.3),
    st.floats(min_value=-3.0, max_value=3.0),
)
def test_warped_ambient_symmetries(t, x, theta, phi):
    m = get_entry("nullline-x-sphere").ambient
    point = np.array([t, x, theta, phi])
    g = m.metric(point)
    assert np.allclose(g, g.T)
    gamma = christoffel(m, point)
    assert np.allclose(gamma, np.swapaxes(gamma, 1, 2), atol=1e-12)
    residuals = tensors.curvature_symmetry_residuals(tensors.lower_curvature(ambient_curvature(m, point), g))
    assert max(residuals.values()) < 1e-9
