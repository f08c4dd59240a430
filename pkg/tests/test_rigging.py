import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core import scalar
from core.catalog import catalog, get_entry
from core.rigging import (
    FrameDual,
    build_rigging,
    choose_seeds,
    construct_transversal,
    is_closed,
    is_conformal_rigging,
    omega_forms,
    projection_P,
    projection_matrix,
    rigged_metric,
)
from core.submanifold import build_frame
from tests.conftest import LIGHT_CONE_POINT, chart_points
from utils.errors import ConfigurationError, TransversalConstructionError, UnsupportedError


def frame_and_rigging(entry_id, u, rigging="auto"):
    entry = get_entry(entry_id)
    setup = entry.setup(rigging)
    frame = build_frame(
        setup.ambient,
        setup.immersion,
        u,
        setup.plan,
        order=1,
        screen_fn=setup.screen_fn,
        rigging_fn=setup.rigging_fn,
        screen_transversal_fn=setup.screen_transversal_fn,
    )
    return build_rigging(frame, setup.plan.seeds, setup.rigging_fn)


@pytest.mark.parametrize(
    "entry_id,u",
    [
        ("null-hyperplane", [0.2, 0.1, -0.4]),
        ("light-cone", LIGHT_CONE_POINT),
        ("flat-coisotropic-r2", [0.3, -0.2, 0.5]),
        ("r1-lightlike-surface", [0.1, 0.9]),
    ],
)
def test_constructed_transversal_is_a_null_dual_frame(entry_id, u):
    frame, rig = frame_and_rigging(entry_id, np.asarray(u, dtype=float))
    gbar = frame.ambient_metric.value
    N, xi = frame.transversal.value, frame.xi.value
    assert rig.source == "auto"
    assert np.allclose(N @ gbar @ xi.T, np.eye(frame.r), atol=1e-10)
    assert np.allclose(N @ gbar @ N.T, 0.0, atol=1e-10)
    assert np.allclose(N @ gbar @ frame.screen.value.T, 0.0, atol=1e-10)
    if frame.k > frame.r:
        assert np.allclose(N @ gbar @ frame.screen_transversal.value.T, 0.0, atol=1e-10)


def test_catalog_rigging_of_null_hyperplane():
    frame, rig = frame_and_rigging("null-hyperplane", np.zeros(3), rigging="catalog")
    assert rig.source == "catalog"
    assert rig.closed_flag == "closed"
    assert np.allclose(rig.omega.value, [[1.0, 0.0, 0.0]])


def test_tilted_rigging_is_not_closed():
    _, rig = frame_and_rigging("light-cone-tilted", LIGHT_CONE_POINT, rigging="catalog")
    closed, worst = is_closed(rig)
    assert closed == [False]
    assert worst > 1e-3
    assert rig.closed_flag == "not-closed"


@pytest.mark.parametrize("sign,index", [(1, 0), (-1, 1)])
def test_rigged_metric_index(sign, index):
    frame, rig = frame_and_rigging("null-hyperplane", np.zeros(3), rigging="catalog")
    rigged = rigged_metric(frame, rig, sign)
    assert rigged.index == index
    assert np.allclose(rigged.matrix.value, np.diag([float(sign), 1.0, 1.0]))


def test_rigged_metric_rejects_bad_sign():
    frame, rig = frame_and_rigging("null-hyperplane", np.zeros(3))
    with pytest.raises(ConfigurationError, match="Sign convention"):
        rigged_metric(frame, rig, 0)


def test_projection_is_idempotent_and_kills_the_radical():
    frame, rig = frame_and_rigging("light-cone", LIGHT_CONE_POINT)
    P = projection_matrix(frame, rig).value
    assert np.allclose(P @ P, P)
    assert np.allclose(P @ frame.xi_coords.value.T, 0.0)


def test_frame_dual_reconstructs_ambient_vectors():
    frame, _ = frame_and_rigging("r1-lightlike-surface", np.array([0.3, 0.7]))
    dual = FrameDual(frame)
    basis = np.eye(4)
    assert np.allclose(dual.reconstruct(dual.split(basis)).value, basis, atol=1e-10)


def test_choose_seeds_without_invertible_pairing():
    with pytest.raises(TransversalConstructionError):
        choose_seeds(np.array([[1.0, 1.0, 0.0]]), np.zeros((3, 3)))


def test_conformal_rigging_fit():
    entry = get_entry("null-hyperplane")
    fit = is_conformal_rigging(entry.ambient, entry.extension, np.zeros(4))
    assert fit.conformal == [True]
    assert fit.lam == [0.0]
    cone = get_entry("light-cone")
    x = np.asarray(cone.immersion.map_fn(LIGHT_CONE_POINT), dtype=float)
    assert is_conformal_rigging(cone.ambient, cone.extension, x).conformal == [False]


def test_conformal_fit_needs_an_extension():
    entry = get_entry("null-hyperplane")
    with pytest.raises(UnsupportedError):
        is_conformal_rigging(entry.ambient, None, np.zeros(4))


def test_pointwise_operations_agree_with_the_built_rigging():
    entry = get_entry("light-cone")
    setup = entry.setup("auto")
    frame, rig = frame_and_rigging("light-cone", LIGHT_CONE_POINT)
    assert np.allclose(scalar.value_of(construct_transversal(frame, setup.plan.seeds)), frame.transversal.value)
    assert np.allclose(scalar.value_of(omega_forms(frame.transversal, frame)), rig.omega.value)
    P = projection_matrix(frame, rig).value
    assert np.allclose(scalar.value_of(projection_P(frame, rig, np.eye(3))), P.T)
    assert np.allclose(scalar.value_of(projection_P(frame, rig, frame.xi_coords.value[0])), 0.0, atol=1e-12)


SUPPORTED = [entry.id for entry in catalog() if entry.supported]


@pytest.mark.parametrize("rigging", ["auto", "catalog"])
@pytest.mark.parametrize("entry_id", SUPPORTED)
@settings(max_examples=15, deadline=None)
@given(data=st.data())
def test_frame_relations_hold_across_the_box(entry_id, rigging, data):
    u = data.draw(chart_points(entry_id))
    frame, rig = frame_and_rigging(entry_id, u, rigging)
    gbar = frame.ambient_metric.value
    N, xi = frame.transversal.value, frame.xi.value
    assert np.allclose(N @ gbar @ xi.T, np.eye(frame.r), atol=1e-9)
    assert np.allclose(N @ gbar @ N.T, 0.0, atol=1e-9)
    assert np.allclose(N @ gbar @ frame.screen.value.T, 0.0, atol=1e-9)

    P = projection_matrix(frame, rig).value
    assert np.allclose(P @ P, P, atol=1e-9)
    assert np.allclose(P @ frame.xi_coords.value.T, 0.0, atol=1e-9)

    for sign in (1, -1):
        g_tilde = rigged_metric(frame, rig, sign).matrix.value
        assert np.allclose(g_tilde, g_tilde.T, atol=1e-12)
        assert abs(np.linalg.det(g_tilde)) > 1e-10
