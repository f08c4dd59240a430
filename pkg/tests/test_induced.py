import numpy as np
import pytest

from core.catalog import get_entry
from core.induced import (
    connection_values,
    gauss_weingarten,
    induce,
    rigged_values,
    screen_split,
    weingarten_N,
)
from tests.conftest import LIGHT_CONE_POINT, geometry_at

SCREEN = np.diag([0.0, 1.0, 1.0])


def cone_metric(u):
    s, theta = u[0], u[1]
    return np.diag([0.0, s * s, (s * np.sin(theta)) ** 2])


def test_light_cone_second_fundamental_form(light_cone_geo):
    s = LIGHT_CONE_POINT[0]
    assert np.allclose(light_cone_geo.h_l[0], -cone_metric(LIGHT_CONE_POINT) / s)
    assert np.isclose(light_cone_geo.h_l[0, 1, 1], -s)


def test_light_cone_shape_operators(light_cone_geo):
    s = LIGHT_CONE_POINT[0]
    assert np.allclose(light_cone_geo.A_N[0], -0.5 / s * SCREEN)
    assert np.allclose(light_cone_geo.A_xi_star[0], -1.0 / s * SCREEN)
    assert np.allclose(light_cone_geo.tau, 0.0, atol=1e-12)


def test_light_cone_rigged_metric(light_cone_geo):
    assert np.allclose(light_cone_geo.g_tilde, cone_metric(LIGHT_CONE_POINT) + np.diag([1.0, 0.0, 0.0]))
    assert light_cone_geo.rigged.index == 0
    assert np.allclose(light_cone_geo.omega, [[1.0, 0.0, 0.0]])


def test_rigged_metric_of_cone_is_flat(light_cone_geo):
    assert np.allclose(light_cone_geo.curvature.R_tilde, 0.0, atol=1e-9)
    assert np.allclose(light_cone_geo.curvature.R_bar, 0.0)


def test_induced_connection_is_torsion_free(light_cone_geo):
    conn = light_cone_geo.conn
    assert np.allclose(conn, np.swapaxes(conn, 1, 2))
    assert max(light_cone_geo.residuals.values()) < 1e-10


def test_null_hyperplane_is_totally_geodesic(null_hyperplane_geo):
    geo = null_hyperplane_geo
    for name in ("conn", "h_l", "A_N", "A_xi_star", "tau", "h_star"):
        assert np.allclose(getattr(geo, name), 0.0, atol=1e-12), name
    assert geo.h_s is None
    assert geo.A_W is None
    assert np.allclose(geo.g_tilde, np.eye(3))


def test_r_lightlike_surface_screen_form():
    geo = geometry_at("r1-lightlike-surface", [0.2, 0.9])
    assert geo.frame.classification == "r-lightlike"
    assert np.allclose(geo.h_s, [[[0.0, 0.0], [0.0, -1.0]]])
    assert np.allclose(geo.h_l, 0.0, atol=1e-12)
    assert np.allclose(geo.g_tilde, np.diag([1.0, np.sinh(0.9) ** 2]))
    assert geo.D_s.shape == (1, 2, 1)
    assert geo.D_l.shape == (1, 1, 2)


def test_warped_ambient_rigged_metric():
    geo = geometry_at("nullline-x-sphere", [0.3, 1.2, 2.0])
    assert np.allclose(geo.g_tilde, np.diag([1.0, 1.0, np.sin(1.2) ** 2]))
    assert np.abs(geo.curvature.R_bar).max() > 0.1


def test_helpers_contract_with_vectors(light_cone_geo):
    X = np.array([0.0, 1.0, 0.0])
    nabla, h_l, h_s = gauss_weingarten(light_cone_geo, X, X)
    assert np.isclose(h_l[0], -LIGHT_CONE_POINT[0])
    assert h_s is None
    A, tau, D_s = weingarten_N(light_cone_geo, X)
    assert np.allclose(A[0], -0.5 / LIGHT_CONE_POINT[0] * X)
    assert D_s is None
    _, _, A_star, _ = screen_split(light_cone_geo, X, X)
    assert np.allclose(A_star[0], -1.0 / LIGHT_CONE_POINT[0] * X)
    assert nabla.shape == (3,)


def test_value_paths_agree_with_jets(light_cone_geo):
    setup = get_entry("light-cone").setup()
    values = rigged_values(setup, LIGHT_CONE_POINT)
    assert np.allclose(values["g_tilde"], light_cone_geo.g_tilde)
    assert np.allclose(values["omega"], light_cone_geo.omega)
    assert np.allclose(connection_values(setup, LIGHT_CONE_POINT), light_cone_geo.conn)


def test_sign_convention_changes_rigged_metric():
    geo = geometry_at("light-cone", LIGHT_CONE_POINT, sign=-1)
    assert np.isclose(geo.g_tilde[0, 0], -1.0)
    assert geo.rigged.index == 1


def test_values_summary(light_cone_geo):
    values = light_cone_geo.values()
    assert values["rigging_source"] == "catalog"
    assert values["closed"] == "closed"
    assert values["classification"] == "coisotropic"
    assert values["screen_source"] == "rigging"


@pytest.mark.parametrize("entry_id", ["light-cone", "cone-x-nullline", "flat-coisotropic-r2"])
def test_automatic_rigging_keeps_frame_relations(entry_id):
    entry = get_entry(entry_id)
    low, high = (np.asarray(b) for b in entry.immersion.box)
    geo = induce(entry.setup("auto"), 0.4 * low + 0.6 * high)
    gbar = geo.ambient_metric
    N, xi = geo.frame.transversal.value, geo.frame.xi.value
    assert geo.rigging.source == "auto"
    assert np.allclose(N @ gbar @ xi.T, np.eye(geo.frame.r), atol=1e-10)
    assert np.allclose(geo.xi @ geo.g, 0.0, atol=1e-10)
