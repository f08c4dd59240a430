"""
Worked example geometries with analytic frames, riggings and expected values.

Every expected value carries a provenance tag: TRIVIAL when it follows from
the construction at sight, DERIVED when it was computed once by hand and
confirmed against the finite-difference oracle.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from core import scalar
from core.ambient import AmbientManifold, ConstantMetric, Warp, WarpedProductMetric
from core.induced import GeometrySetup, plan_setup
from core.submanifold import Immersion, classify, pullback
from utils.errors import ConfigurationError

logger = logging.getLogger("NullRig")

TRIVIAL = "TRIVIAL"
DERIVED = "DERIVED: oracle"


@dataclass(frozen=True)
class ExpectedValue:
    """
    A named quantity the computed geometry must reproduce.

    Args:
        value: constant, or chart point -> value
        tag: provenance, TRIVIAL or DERIVED
        rigging: rigging mode the value holds for; None for every mode
        sign: sign convention the value holds for; None for both
    """

    value: object
    tag: str
    rigging: Optional[str] = "catalog"
    sign: Optional[int] = None

    def at(self, u):
        return self.value(u) if callable(self.value) else self.value

    def applies(self, rigging: str, sign: int) -> bool:
        return (self.rigging is None or self.rigging == rigging) and (self.sign is None or self.sign == sign)


@dataclass
class CatalogEntry:
    """
    One example geometry.

    `immersion_spec` is the config-file description of the immersion: either
    {"kind": "linear", "matrix", "offset"} or {"kind": "catalog", "entry"}.
    """

    id: str
    description: str
    ambient: AmbientManifold
    immersion: Immersion
    classification: str
    closed: Optional[bool] = None
    expected: Dict[str, ExpectedValue] = field(default_factory=dict)
    rigging_fn: Optional[Callable] = None
    screen_fn: Optional[Callable] = None
    screen_transversal_fn: Optional[Callable] = None
    extension: Optional[Callable] = None
    immersion_spec: Dict[str, object] = field(default_factory=dict)
    _setups: Dict[Tuple[str, int], GeometrySetup] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def supported(self) -> bool:
        return self.classification in ("r-lightlike", "coisotropic")

    def computed_classification(self) -> str:
        pm = pullback(self.ambient, self.immersion, self.immersion.reference_point())
        return classify(self.immersion.sub_dim, self.ambient.dim - self.immersion.sub_dim, pm.nullity)

    def declared_closed(self, rigging: str) -> Optional[bool]:
        return self.closed if rigging == "catalog" or self.rigging_fn is None else None

    def expected_for(self, rigging: str, sign: int) -> Dict[str, ExpectedValue]:
        catalog_like = "catalog" if self.rigging_fn is None else rigging
        return {name: ev for name, ev in self.expected.items() if ev.applies(catalog_like, sign)}

    def setup(self, rigging: str = "catalog", sign: int = 1) -> GeometrySetup:
        """Frozen chart plan for the given rigging mode and sign convention (cached)."""
        key = (rigging, sign)
        with self._lock:
            if key not in self._setups:
                use_catalog = rigging == "catalog"
                logger.debug(f"Planning {self.id} with {rigging} rigging, sign {sign:+d}")
                self._setups[key] = plan_setup(
                    self.ambient,
                    self.immersion,
                    sign=sign,
                    screen_fn=self.screen_fn,
                    rigging_fn=self.rigging_fn if use_catalog else None,
                    screen_transversal_fn=self.screen_transversal_fn,
                    extension=self.extension if use_catalog or self.rigging_fn is None else None,
                )
            return self._setups[key]

    def summary(self) -> dict:
        return {
            "id": self.id,
            "classification": self.classification,
            "description": self.description,
            "ambient": {"dim": self.ambient.dim, "index": self.ambient.index, "metric": self.ambient.metric_fn.describe()},
            "sub_dim": self.immersion.sub_dim,
            "closed": self.closed,
            "analytic_rigging": self.rigging_fn is not None,
            "expected": {name: ev.tag for name, ev in sorted(self.expected.items())},
        }


# -- helpers ---------------------------------------------------------------------------------------


def _unit_sphere(theta, phi) -> List:
    st = scalar.sin(theta)
    return [st * scalar.cos(phi), st * scalar.sin(phi), scalar.cos(theta)]


def _rows(*rows):
    """(r, N) field array from rows of mixed constants and jets."""
    return scalar.stack([scalar.stack(list(row)) for row in rows])


def _box_domain(low, high, margin: float = 0.0):
    low = np.asarray(low, dtype=float) - margin
    high = np.asarray(high, dtype=float) + margin

    def inside(u) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u > low) and np.all(u < high))

    return inside


def linear_map(matrix, offset=None):
    matrix = np.asarray(matrix, dtype=float)
    offset = np.zeros(matrix.shape[0]) if offset is None else np.asarray(offset, dtype=float)

    def map_fn(u):
        return matrix @ u + offset

    return map_fn


def _flat(diagonal, name: str) -> AmbientManifold:
    diagonal = np.asarray(diagonal, dtype=float)
    return AmbientManifold(
        dim=diagonal.size, index=int(np.sum(diagonal < 0)), metric_fn=ConstantMetric(np.diag(diagonal)), name=name
    )


def _zeros(*shape):
    return np.zeros(shape)


# -- entries ------------------------------------------------------------------------------------------


def _null_hyperplane() -> CatalogEntry:
    matrix = [[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    box = ([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
    N = np.array([[-0.5, 0.5, 0.0, 0.0]])
    return CatalogEntry(
        id="null-hyperplane",
        description="{t = x} in Minkowski R^4; totally geodesic",
        ambient=_flat([-1, 1, 1, 1], "minkowski-4"),
        immersion=Immersion(3, linear_map(matrix), box=box, name="null-hyperplane"),
        classification="coisotropic",
        closed=True,
        rigging_fn=lambda u: N,
        extension=lambda x: N,
        immersion_spec={"kind": "linear", "matrix": matrix, "offset": [0, 0, 0, 0]},
        expected={
            "rank_r": ExpectedValue(1, TRIVIAL, rigging=None),
            "h_l": ExpectedValue(_zeros(1, 3, 3), TRIVIAL, rigging=None),
            "A_N": ExpectedValue(_zeros(1, 3, 3), TRIVIAL),
            "A_xi_star": ExpectedValue(_zeros(1, 3, 3), TRIVIAL),
            "tau": ExpectedValue(_zeros(1, 1, 3), TRIVIAL),
            "R_ind": ExpectedValue(_zeros(3, 3, 3, 3), TRIVIAL),
            "R_tilde": ExpectedValue(_zeros(3, 3, 3, 3), TRIVIAL),
            "g_tilde": ExpectedValue(np.eye(3), DERIVED, sign=1),
            "rigged_index": ExpectedValue(0, TRIVIAL, rigging=None, sign=1),
        },
    )


def _cone_map(s, theta, phi) -> List:
    return [s] + [s * c for c in _unit_sphere(theta, phi)]


def _cone_rigging(u):
    return [-0.5] + [0.5 * c for c in _unit_sphere(u[1], u[2])]


def _cone_extension(x):
    radius = scalar.sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
    return _rows([-0.5, 0.5 * x[1] / radius, 0.5 * x[2] / radius, 0.5 * x[3] / radius])


CONE_BOX = ([0.5, 0.2, 0.1], [2.0, np.pi - 0.2, 2.0 * np.pi - 0.1])
CONE_DOMAIN = _box_domain([0.1, 0.1, -10.0], [1e6, np.pi - 0.1, 10.0])
CONE_SCREEN = np.diag([0.0, 1.0, 1.0])


def _cone_metric(u):
    s, theta = u[0], u[1]
    return np.diag([0.0, s * s, (s * np.sin(theta)) ** 2])


def _light_cone() -> CatalogEntry:
    return CatalogEntry(
        id="light-cone",
        description="future light cone in Minkowski R^4, polar chart (s, theta, phi)",
        ambient=_flat([-1, 1, 1, 1], "minkowski-4"),
        immersion=Immersion(3, lambda u: scalar.stack(_cone_map(u[0], u[1], u[2])), domain=CONE_DOMAIN, box=CONE_BOX, name="light-cone"),
        classification="coisotropic",
        closed=True,
        rigging_fn=lambda u: _rows(_cone_rigging(u)),
        extension=_cone_extension,
        immersion_spec={"kind": "catalog", "entry": "light-cone"},
        expected={
            "rank_r": ExpectedValue(1, TRIVIAL, rigging=None),
            "h_l": ExpectedValue(lambda u: -(_cone_metric(u) / u[0])[None], DERIVED, rigging=None),
            "A_N": ExpectedValue(lambda u: (-0.5 / u[0] * CONE_SCREEN)[None], DERIVED),
            "A_xi_star": ExpectedValue(lambda u: (-1.0 / u[0] * CONE_SCREEN)[None], DERIVED),
            "tau": ExpectedValue(_zeros(1, 1, 3), DERIVED),
            "tau_of_xi": ExpectedValue(_zeros(1, 1), DERIVED),
            "R_tilde": ExpectedValue(_zeros(3, 3, 3, 3), DERIVED, sign=1),
            "g_tilde": ExpectedValue(lambda u: _cone_metric(u) + np.diag([1.0, 0.0, 0.0]), DERIVED, sign=1),
            "conformal_factor": ExpectedValue(np.array([0.5]), DERIVED),
            "rigged_index": ExpectedValue(0, TRIVIAL, rigging=None, sign=1),
            "closed": ExpectedValue(1.0, TRIVIAL),
        },
    )


def _flat_coisotropic_r2() -> CatalogEntry:
    matrix = [[1, 0, 0], [0, 1, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    N = np.array([[-0.5, 0.0, 0.5, 0.0, 0.0], [0.0, -0.5, 0.0, 0.5, 0.0]])
    return CatalogEntry(
        id="flat-coisotropic-r2",
        description="u1-perp ∩ u2-perp in R^5 of index 2, u1 = (1,0,1,0,0), u2 = (0,1,0,1,0)",
        ambient=_flat([-1, -1, 1, 1, 1], "flat-5-2"),
        immersion=Immersion(3, linear_map(matrix), box=([-1.0] * 3, [1.0] * 3), name="flat-coisotropic-r2"),
        classification="coisotropic",
        closed=True,
        rigging_fn=lambda u: N,
        extension=lambda x: N,
        immersion_spec={"kind": "linear", "matrix": matrix, "offset": [0] * 5},
        expected={
            "rank_r": ExpectedValue(2, TRIVIAL, rigging=None),
            "h_l": ExpectedValue(_zeros(2, 3, 3), TRIVIAL, rigging=None),
            "A_N": ExpectedValue(_zeros(2, 3, 3), TRIVIAL),
            "A_xi_star": ExpectedValue(_zeros(2, 3, 3), TRIVIAL),
            "tau": ExpectedValue(_zeros(2, 2, 3), TRIVIAL),
            "R_ind": ExpectedValue(_zeros(3, 3, 3, 3), TRIVIAL),
            "R_tilde": ExpectedValue(_zeros(3, 3, 3, 3), TRIVIAL),
            "g_tilde": ExpectedValue(np.eye(3), DERIVED, sign=1),
            "rigged_index": ExpectedValue(0, DERIVED, rigging=None, sign=1),
        },
    )


def _cone_x_nullline() -> CatalogEntry:
    box = ([0.5, 0.2, 0.1, -1.0], [2.0, np.pi - 0.2, 2.0 * np.pi - 0.1, 1.0])
    domain = _box_domain([0.1, 0.1, -10.0, -1e6], [1e6, np.pi - 0.1, 10.0, 1e6])

    def map_fn(u):
        return scalar.stack(_cone_map(u[0], u[1], u[2]) + [u[3], u[3]])

    def rigging(u):
        return _rows(_cone_rigging(u) + [0.0, 0.0], [0.0, 0.0, 0.0, 0.0, -0.5, 0.5])

    def extension(x):
        radius = scalar.sqrt(x[1] * x[1] + x[2] * x[2] + x[3] * x[3])
        return _rows(
            [-0.5, 0.5 * x[1] / radius, 0.5 * x[2] / radius, 0.5 * x[3] / radius, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, -0.5, 0.5],
        )

    def g_tilde(u):
        s, theta = u[0], u[1]
        return np.diag([1.0, s * s, (s * np.sin(theta)) ** 2, 1.0])

    return CatalogEntry(
        id="cone-x-nullline",
        description="light cone × null line in R^6 of index 2",
        ambient=_flat([-1, 1, 1, 1, -1, 1], "flat-6-2"),
        immersion=Immersion(4, map_fn, domain=domain, box=box, name="cone-x-nullline"),
        classification="coisotropic",
        closed=True,
        rigging_fn=rigging,
        extension=extension,
        immersion_spec={"kind": "catalog", "entry": "cone-x-nullline"},
        expected={
            "rank_r": ExpectedValue(2, TRIVIAL, rigging=None),
            "tau_of_xi": ExpectedValue(_zeros(2, 2), DERIVED),
            "R_tilde": ExpectedValue(_zeros(4, 4, 4, 4), DERIVED, sign=1),
            "g_tilde": ExpectedValue(g_tilde, DERIVED, sign=1),
            "conformal_factor": ExpectedValue(np.array([0.5, 0.0]), DERIVED),
            "rigged_index": ExpectedValue(0, DERIVED, rigging=None, sign=1),
        },
    )


def _r1_lightlike_surface() -> CatalogEntry:
    box = ([-1.0, 0.3], [1.0, 1.5])
    domain = _box_domain([-1e6, 0.05], [1e6, 1e6])
    N = np.array([[-0.5, 0.0, 0.5, 0.0]])

    def screen_transversal(u):
        v = u[1]
        scale = 1.0 / scalar.sinh(v)
        return _rows([0.0, scalar.cosh(v) * scale, 0.0, scale])

    return CatalogEntry(
        id="r1-lightlike-surface",
        description="phi(u, v) = (u, v, u, sinh v) in R^4 of index 2, v > 0",
        ambient=_flat([-1, -1, 1, 1], "flat-4-2"),
        immersion=Immersion(
            2,
            lambda u: scalar.stack([u[0], u[1], u[0], scalar.sinh(u[1])]),
            domain=domain,
            box=box,
            name="r1-lightlike-surface",
        ),
        classification="r-lightlike",
        closed=True,
        rigging_fn=lambda u: N,
        screen_transversal_fn=screen_transversal,
        extension=lambda x: N,
        immersion_spec={"kind": "catalog", "entry": "r1-lightlike-surface"},
        expected={
            "rank_r": ExpectedValue(1, DERIVED, rigging=None),
            "h_l": ExpectedValue(_zeros(1, 2, 2), DERIVED, rigging=None),
            "h_s": ExpectedValue(np.array([[[0.0, 0.0], [0.0, -1.0]]]), DERIVED),
            "g_tilde": ExpectedValue(lambda u: np.diag([1.0, np.sinh(u[1]) ** 2]), DERIVED, sign=1),
            "rigged_index": ExpectedValue(0, DERIVED, rigging=None, sign=1),
            "tau_of_xi": ExpectedValue(_zeros(1, 1), DERIVED),
        },
    )


def _nullline_x_sphere() -> CatalogEntry:
    metric = WarpedProductMetric(
        [[[-1.0, 0.0], [0.0, 1.0]], [[1.0]], [[1.0]]],
        [Warp(), Warp(), Warp("sin", 2)],
    )
    ambient = AmbientManifold(
        dim=4,
        index=1,
        metric_fn=metric,
        chart_domain=lambda x: bool(0.05 < x[2] < np.pi - 0.05),
        name="minkowski-2-x-sphere",
    )
    box = ([-1.0, 0.3, 0.1], [1.0, np.pi - 0.3, 2.0 * np.pi - 0.1])
    N = np.array([[-0.5, 0.5, 0.0, 0.0]])
    return CatalogEntry(
        id="nullline-x-sphere",
        description="null line × round S^2 inside Minkowski^2 × S^2",
        ambient=ambient,
        immersion=Immersion(
            3,
            lambda u: scalar.stack([u[0], u[0], u[1], u[2]]),
            domain=_box_domain([-1e6, 0.1, -10.0], [1e6, np.pi - 0.1, 10.0]),
            box=box,
            name="nullline-x-sphere",
        ),
        classification="coisotropic",
        closed=True,
        rigging_fn=lambda u: N,
        extension=lambda x: N,
        immersion_spec={"kind": "catalog", "entry": "nullline-x-sphere"},
        expected={
            "rank_r": ExpectedValue(1, TRIVIAL, rigging=None),
            "h_l": ExpectedValue(_zeros(1, 3, 3), DERIVED, rigging=None),
            "A_N": ExpectedValue(_zeros(1, 3, 3), DERIVED),
            "A_xi_star": ExpectedValue(_zeros(1, 3, 3), DERIVED),
            "tau": ExpectedValue(_zeros(1, 1, 3), DERIVED),
            "g_tilde": ExpectedValue(lambda u: np.diag([1.0, 1.0, np.sin(u[1]) ** 2]), DERIVED, sign=1),
            "rigged_index": ExpectedValue(0, TRIVIAL, rigging=None, sign=1),
        },
    )


TILT = 0.5


def _light_cone_tilted() -> CatalogEntry:
    """N' = N + c e_θ − ½c² ξ with e_θ the unit θ-direction of the cone."""

    def rigging(u):
        s, theta, phi = u[0], u[1], u[2]
        n_hat = _unit_sphere(theta, phi)
        e_theta = [scalar.cos(theta) * scalar.cos(phi), scalar.cos(theta) * scalar.sin(phi), -scalar.sin(theta)]
        half = 0.5 * TILT * TILT
        row = [-0.5 - half] + [0.5 * n + TILT * e - half * n for n, e in zip(n_hat, e_theta)]
        return _rows(row)

    return CatalogEntry(
        id="light-cone-tilted",
        description="light cone with a tilted, non-closed rigging (c = 0.5) and its induced screen",
        ambient=_flat([-1, 1, 1, 1], "minkowski-4"),
        immersion=Immersion(3, lambda u: scalar.stack(_cone_map(u[0], u[1], u[2])), domain=CONE_DOMAIN, box=CONE_BOX, name="light-cone"),
        classification="coisotropic",
        closed=False,
        rigging_fn=rigging,
        immersion_spec={"kind": "catalog", "entry": "light-cone-tilted"},
        expected={
            "rank_r": ExpectedValue(1, TRIVIAL, rigging=None),
            "h_l": ExpectedValue(lambda u: -(_cone_metric(u) / u[0])[None], DERIVED, rigging=None),
            "closed": ExpectedValue(0.0, DERIVED),
            "rigged_index": ExpectedValue(0, DERIVED, rigging=None, sign=1),
        },
    )


def _totally_null_plane() -> CatalogEntry:
    matrix = [[1, 0], [0, 1], [1, 0], [0, 1]]
    return CatalogEntry(
        id="totally-null-plane",
        description="totally null 2-plane in R^4 of index 2 (rejected)",
        ambient=_flat([-1, -1, 1, 1], "flat-4-2"),
        immersion=Immersion(2, linear_map(matrix), box=([-1.0] * 2, [1.0] * 2), name="totally-null-plane"),
        classification="totally-null",
        immersion_spec={"kind": "linear", "matrix": matrix, "offset": [0] * 4},
    )


def _isotropic_plane() -> CatalogEntry:
    matrix = [[1, 0], [0, 1], [1, 0], [0, 1], [0, 0]]
    return CatalogEntry(
        id="isotropic-plane",
        description="isotropic 2-plane in R^5 of index 2 (rejected)",
        ambient=_flat([-1, -1, 1, 1, 1], "flat-5-2"),
        immersion=Immersion(2, linear_map(matrix), box=([-1.0] * 2, [1.0] * 2), name="isotropic-plane"),
        classification="isotropic",
        immersion_spec={"kind": "linear", "matrix": matrix, "offset": [0] * 5},
    )


_BUILDERS = (
    _null_hyperplane,
    _light_cone,
    _flat_coisotropic_r2,
    _cone_x_nullline,
    _r1_lightlike_surface,
    _nullline_x_sphere,
    _light_cone_tilted,
    _totally_null_plane,
    _isotropic_plane,
)

_CATALOG: Optional[Dict[str, CatalogEntry]] = None
_CATALOG_LOCK = threading.Lock()


def catalog() -> List[CatalogEntry]:
    """All catalog entries, built once."""
    global _CATALOG
    with _CATALOG_LOCK:
        if _CATALOG is None:
            _CATALOG = {entry.id: entry for entry in (build() for build in _BUILDERS)}
        return list(_CATALOG.values())


def get_entry(entry_id: str) -> CatalogEntry:
    for entry in catalog():
        if entry.id == entry_id:
            return entry
    raise ConfigurationError(f"Unknown example '{entry_id}' (see `nullrig list`)")


def expected_values(entry_id: str) -> Dict[str, ExpectedValue]:
    """Tagged expected quantities of an entry."""
    return dict(get_entry(entry_id).expected)


def entry_ids() -> List[str]:
    return [entry.id for entry in catalog()]
