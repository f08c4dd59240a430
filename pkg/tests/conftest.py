import numpy as np
import pytest
from hypothesis import strategies as st

from core.ambient import AmbientManifold, ConstantMetric
from core.catalog import get_entry
from core.induced import induce
from core.verifier import CheckContext

LIGHT_CONE_POINT = np.array([1.2, 1.0, 2.0])


def minkowski(dim=4):
    return AmbientManifold(dim=dim, index=1, metric_fn=ConstantMetric(np.diag([-1.0] + [1.0] * (dim - 1))), name=f"minkowski-{dim}")


def geometry_at(entry_id, u, rigging="catalog", sign=1):
    entry = get_entry(entry_id)
    return induce(entry.setup(rigging, sign), np.asarray(u, dtype=float))


def context_for(entry_id, rigging="catalog", sign=1, oracle=False):
    entry = get_entry(entry_id)
    return CheckContext(
        setup=entry.setup(rigging, sign),
        expected=entry.expected_for(rigging, sign),
        declared_closed=entry.declared_closed(rigging),
        oracle=oracle,
    )


@pytest.fixture(scope="session")
def light_cone_geo():
    return geometry_at("light-cone", LIGHT_CONE_POINT)


@pytest.fixture(scope="session")
def null_hyperplane_geo():
    return geometry_at("null-hyperplane", [0.1, -0.3, 0.4])


def chart_points(entry_id, margin=0.05):
    """Hypothesis strategy for points of an entry's sampling box, kept off its edges."""
    low, high = (np.asarray(b, dtype=float) for b in get_entry(entry_id).immersion.box)
    pad = margin * (high - low)
    coords = [st.floats(min_value=float(a), max_value=float(b)) for a, b in zip(low + pad, high - pad)]
    return st.tuples(*coords).map(np.array)
