"""
The immersed submanifold: pullback metric, radical, screen and screen-transversal frames.

Frames are built from closed-form linear algebra whose discrete choices (pivot
columns, Gram–Schmidt order, accepted normal candidates) are frozen in a
ChartPlan at a reference point.  With the choices frozen, every construction
is a smooth function of the chart point and runs on jets unchanged.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from core import scalar, tensors
from core.ambient import AmbientManifold, always
from core.scalar import DScalar
from utils import config
from utils.errors import (
    ConfigurationError,
    ImmersionError,
    NotNullError,
    RechartError,
    ScreenSelectionError,
)

logger = logging.getLogger("NullRig")

CLASSIFICATIONS = ("r-lightlike", "coisotropic", "isotropic", "totally-null")
SUPPORTED_CLASSIFICATIONS = ("r-lightlike", "coisotropic")


@dataclass
class Immersion:
    """
    Smooth map from the submanifold chart into the ambient chart.

    Args:
        sub_dim: n
        map_fn: n-point -> ambient point; must accept DScalar points
        domain: predicate on chart points (degenerate loci excluded)
        box: (low, high) bounds used for sampling
        name: label used in reports
    """

    sub_dim: int
    map_fn: Callable
    domain: Callable[[np.ndarray], bool] = always
    box: Optional[Tuple[Sequence[float], Sequence[float]]] = None
    name: str = "immersion"

    def __post_init__(self):
        if self.sub_dim < 2:
            raise ConfigurationError(f"Submanifold dimension must be at least 2, got {self.sub_dim}")

    def reference_point(self) -> np.ndarray:
        if self.box is None:
            raise ConfigurationError(f"Immersion {self.name} has no sampling box")
        low, high = (np.asarray(b, dtype=float) for b in self.box)
        return 0.5 * (low + high)

    def jacobian(self, u) -> np.ndarray:
        phi = self.map_fn(scalar.lift(u, order=1))
        return phi.grad


@dataclass
class PullbackMetric:
    base: np.ndarray
    matrix: np.ndarray
    jacobian: np.ndarray

    @property
    def nullity(self) -> int:
        return self.matrix.shape[0] - tensors.numerical_rank(self.matrix)


def pullback(m: AmbientManifold, f: Immersion, u) -> PullbackMetric:
    """Induced metric g = Jᵀ ḡ J at u."""
    u = np.asarray(u, dtype=float)
    if not f.domain(u):
        raise ConfigurationError(f"Point {u.tolist()} lies outside the domain of {f.name}")
    J = f.jacobian(u)
    if tensors.numerical_rank(J) < f.sub_dim:
        raise ImmersionError(f"Jacobian of {f.name} is rank-deficient at {u.tolist()}")
    x = np.asarray(f.map_fn(u), dtype=float)
    gbar = m.validate_point(x)
    g = J.T @ gbar @ J
    return PullbackMetric(base=u, matrix=0.5 * (g + g.T), jacobian=J)


def classify(n: int, k: int, r: int) -> str:
    """
    Case label of an r-null submanifold with codimension k.

    One of r-lightlike, coisotropic, isotropic or totally-null; r = 0 gives
    "nondegenerate", which no null-frame construction accepts.
    """
    if n < 1 or k < 1 or not 0 <= r <= min(n, k):
        raise ConfigurationError(f"Invalid dimensions n={n}, k={k}, r={r}")
    if r == 0:
        return "nondegenerate"
    if r < min(n, k):
        return "r-lightlike"
    if r == k < n:
        return "coisotropic"
    if r == n < k:
        return "isotropic"
    return "totally-null"


def require_supported(label: str, name: str = "submanifold") -> None:
    if label not in SUPPORTED_CLASSIFICATIONS:
        raise ConfigurationError(
            f"{name} is {label}; only r-lightlike and coisotropic submanifolds are supported"
        )


# -- discrete choices -------------------------------------------------------------------


def _relative_det(block: np.ndarray, scale: float) -> float:
    size = block.shape[0]
    if size == 0:
        return 1.0
    return abs(float(np.linalg.det(block))) / (scale ** size if scale > 0 else 1.0)


def best_principal_subset(matrix: np.ndarray, size: int) -> Tuple[int, ...]:
    """Principal index subset of the given size with the largest |det| (first in lexicographic order on ties)."""
    scale = float(np.max(np.abs(matrix))) if matrix.size else 1.0
    best, best_det = (), -1.0
    for subset in itertools.combinations(range(matrix.shape[0]), size):
        d = _relative_det(matrix[np.ix_(subset, subset)], scale)
        if d > best_det * (1.0 + 1e-12):
            best, best_det = subset, d
    return best


def best_column_subset(matrix: np.ndarray) -> Tuple[int, ...]:
    """Columns of a full-row-rank matrix forming the best-conditioned square block."""
    rows = matrix.shape[0]
    scale = float(np.max(np.abs(matrix))) if matrix.size else 1.0
    best, best_det = (), -1.0
    for subset in itertools.combinations(range(matrix.shape[1]), rows):
        d = _relative_det(matrix[:, subset], scale)
        if d > best_det * (1.0 + 1e-12):
            best, best_det = subset, d
    return best


def _is_null(norm2: float, metric_scale: float, vector_scale: float) -> bool:
    return abs(norm2) <= config.PIVOT_TOL * max(1.0, metric_scale * vector_scale ** 2)


def signed_gram_schmidt(candidates: Sequence, metric, accept: Optional[Sequence[bool]] = None, count: Optional[int] = None):
    """
    Gram–Schmidt against an indefinite metric.

    Args:
        candidates: component vectors, plain or jets, processed in order
        metric: metric matrix in the same components
        accept: frozen acceptance pattern; when given, an accepted candidate that
            turns out null raises ScreenSelectionError
        count: stop accepting once this many vectors were produced

    Returns:
        (vectors, signs, pattern) with metric(v_a, v_b) = signs[a] δ_ab
    """
    metric_scale = float(np.max(np.abs(scalar.value_of(metric)))) or 1.0
    vectors, signs, pattern = [], [], []
    for idx, c in enumerate(candidates):
        wanted = accept[idx] if accept is not None else (count is None or len(vectors) < count)
        if not wanted:
            pattern.append(False)
            continue
        w = c
        for v, eps in zip(vectors, signs):
            w = w - (eps * tensors.inner(metric, c, v)) * v
        norm2 = tensors.inner(metric, w, w)
        value = float(scalar.value_of(norm2))
        vector_scale = float(np.max(np.abs(scalar.value_of(c))))
        if _is_null(value, metric_scale, vector_scale):
            if accept is not None:
                raise ScreenSelectionError(f"Candidate {idx} is null after orthogonalisation (norm² = {value:.3e})")
            pattern.append(False)
            continue
        eps = 1.0 if value > 0 else -1.0
        vectors.append(w / scalar.sqrt(norm2 * eps))
        signs.append(eps)
        pattern.append(True)
    return vectors, np.array(signs), tuple(pattern)


@dataclass(frozen=True)
class ChartPlan:
    """Discrete choices frozen at a reference point, valid while the pivot pattern holds."""

    reference: Tuple[float, ...]
    n: int
    k: int
    r: int
    classification: str
    tangent_pivots: Tuple[int, ...]
    tangent_free: Tuple[int, ...]
    screen_candidates: Tuple[Tuple[float, ...], ...]
    normal_pivots: Tuple[int, ...]
    normal_free: Tuple[int, ...]
    normal_accept: Tuple[bool, ...]
    seeds: Tuple[Tuple[float, ...], ...] = ()

    def describe(self) -> dict:
        return {
            "reference": list(self.reference),
            "nullity": self.r,
            "classification": self.classification,
            "tangent_pivots": list(self.tangent_pivots),
            "screen_order": [list(c) for c in self.screen_candidates],
            "normal_pivots": list(self.normal_pivots),
            "seeds": [list(s) for s in self.seeds],
        }


def _screen_candidate_order(metric: np.ndarray, pivots: Tuple[int, ...]) -> Tuple[Tuple[float, ...], ...]:
    """First candidate list (pivot directions, then pairwise sums) whose signed Gram–Schmidt never meets a null vector."""
    n = metric.shape[0]
    basis = [np.eye(n)[p] for p in pivots]
    pool = [basis]
    sums = [basis[i] + basis[j] for i, j in itertools.combinations(range(len(basis)), 2)]
    pool.extend([list(perm) for perm in itertools.permutations(basis)][1:])
    pool.append(sums + basis)
    for candidates in pool:
        vectors, _, pattern = signed_gram_schmidt(candidates, metric, count=len(basis))
        if len(vectors) == len(basis):
            return tuple(tuple(float(x) for x in c) for c, ok in zip(candidates, pattern) if ok)
    raise ScreenSelectionError("No candidate order yields a nondegenerate screen")


def make_chart_plan(m: AmbientManifold, f: Immersion, u_ref=None) -> ChartPlan:
    """Freeze pivots, screen order and normal-candidate acceptance at a reference point."""
    u_ref = f.reference_point() if u_ref is None else np.asarray(u_ref, dtype=float)
    pm = pullback(m, f, u_ref)
    n = f.sub_dim
    k = m.dim - n
    r = pm.nullity
    label = classify(n, k, r)
    if r == 0:
        raise NotNullError(f"{f.name} is nondegenerate at {u_ref.tolist()}; no radical to build")
    require_supported(label, f.name)
    pivots = best_principal_subset(pm.matrix, n - r)
    free = tuple(i for i in range(n) if i not in pivots)
    screen = _screen_candidate_order(pm.matrix, pivots) if pivots else ()

    x = np.asarray(f.map_fn(u_ref), dtype=float)
    gbar = m.metric(x)
    A = pm.jacobian.T @ gbar
    normal_pivots = best_column_subset(A)
    normal_free = tuple(i for i in range(m.dim) if i not in normal_pivots)
    normals = _normal_basis(A, normal_pivots, normal_free)
    _, _, accept = signed_gram_schmidt(list(normals), gbar, count=k - r)
    if sum(accept) != k - r:
        raise ScreenSelectionError(f"Normal bundle of {f.name} has no nondegenerate complement of the radical")
    logger.debug(f"Chart plan for {f.name}: r={r}, pivots={pivots}, normal pivots={normal_pivots}")
    return ChartPlan(
        reference=tuple(float(v) for v in u_ref),
        n=n,
        k=k,
        r=r,
        classification=label,
        tangent_pivots=pivots,
        tangent_free=free,
        screen_candidates=screen,
        normal_pivots=normal_pivots,
        normal_free=normal_free,
        normal_accept=accept,
    )


# -- generic constructions -----------------------------------------------------------------


def _normal_basis(A, pivots: Tuple[int, ...], free: Tuple[int, ...]):
    """Kernel of a full-row-rank (n × N) matrix: ν_f = e_f − A_Q⁻¹ A_f on the pivot columns Q."""
    return _kernel_from_pivots(A, list(range(A.shape[0])), pivots, free, A.shape[1])


def _kernel_from_pivots(M, rows, pivots, free, size):
    if not pivots:
        return np.eye(size)[list(free)]
    block = M[np.ix_(rows, pivots)]
    rest = M[np.ix_(rows, free)]
    X = -(scalar.inv(block) @ rest)
    vectors = []
    for j, fcol in enumerate(free):
        comps = []
        for c in range(size):
            if c in pivots:
                comps.append(X[pivots.index(c), j])
            elif c == fcol:
                comps.append(1.0)
            else:
                comps.append(0.0)
        vectors.append(scalar.stack(comps))
    return scalar.stack(vectors)


def radical_basis(metric, pivots: Optional[Sequence[int]] = None):
    """
    Kernel of a degenerate pullback metric by pivoted elimination.

    Args:
        metric: n×n pullback matrix (plain or jet)
        pivots: frozen pivot columns; chosen from the value when omitted

    Returns:
        (r, n) array or jet, one row per free (non-pivot) index; the row has
        coordinate 1 at its own free index and 0 at the other free indices,
        so the basis is not orthonormal and rescales with the pivot choice
    """
    value = np.asarray(scalar.value_of(metric))
    n = value.shape[0]
    rank = tensors.numerical_rank(value)
    if rank == n:
        raise NotNullError("Pullback metric is nondegenerate; the radical is trivial")
    if pivots is None:
        pivots = best_principal_subset(value, rank)
    else:
        if rank != len(pivots):
            raise RechartError(f"Nullity changed from {n - len(pivots)} to {n - rank}")
        scale = float(np.max(np.abs(value))) or 1.0
        if _relative_det(value[np.ix_(pivots, pivots)], scale) < config.PIVOT_TOL:
            raise RechartError(f"Pivot block {tuple(pivots)} is ill-conditioned at this point")
    pivots = list(pivots)
    free = [i for i in range(n) if i not in pivots]
    return _kernel_from_pivots(metric, pivots, pivots, free, n)


@dataclass
class NullFrame:
    """
    Adapted frame at a chart point, as jets over the chart coordinates.

    Ambient vectors carry components in the ambient chart, tangent vectors in the
    submanifold chart; `xi = J · xi_coords` and `screen = J · screen_coords`.
    """

    base: np.ndarray
    n: int
    k: int
    r: int
    classification: str
    phi: DScalar
    jacobian: DScalar
    ambient_metric: DScalar
    metric: DScalar
    xi_coords: DScalar
    xi: DScalar
    screen_coords: DScalar
    screen: DScalar
    screen_signs: np.ndarray
    screen_transversal: DScalar
    st_signs: np.ndarray
    screen_source: str = "canonical"
    transversal: Optional[DScalar] = None

    def values(self) -> dict:
        out = {
            "base": self.base.tolist(),
            "nullity": self.r,
            "classification": self.classification,
            "pullback_metric": self.metric.value.tolist(),
            "radical": self.xi.value.tolist(),
            "radical_coords": self.xi_coords.value.tolist(),
            "screen": self.screen.value.tolist(),
            "screen_signs": self.screen_signs.tolist(),
            "screen_transversal": self.screen_transversal.value.tolist(),
            "screen_transversal_signs": self.st_signs.tolist(),
            "screen_source": self.screen_source,
        }
        if self.transversal is not None:
            out["transversal"] = self.transversal.value.tolist()
        return out


def _empty(cols: int, like: DScalar) -> DScalar:
    return scalar.constant(np.zeros((0, cols)), like.nvars, like.order)


def _rows(vectors: List, cols: int, like: DScalar) -> DScalar:
    if not vectors:
        return _empty(cols, like)
    return scalar.stack(vectors)


def submanifold_jets(m: AmbientManifold, f: Immersion, u, order: int = 2):
    """φ (order+1), J, ḡ∘φ and g (order) as jets over the chart coordinates."""
    u = np.asarray(u, dtype=float)
    if not f.domain(u):
        raise ConfigurationError(f"Point {u.tolist()} lies outside the domain of {f.name}")
    phi = f.map_fn(scalar.lift(u, order=order + 1))
    J = scalar.stack([phi.partial(a) for a in range(f.sub_dim)], axis=1)
    if tensors.numerical_rank(J.value) < f.sub_dim:
        raise ImmersionError(f"Jacobian of {f.name} is rank-deficient at {u.tolist()}")
    m.validate_point(phi.value)
    gbar = m.metric_fn(phi.truncate(order))
    if not isinstance(gbar, DScalar):
        gbar = scalar.constant(gbar, f.sub_dim, order)
    g = scalar.einsum("ea,eb->ab", J, scalar.einsum("ef,fb->eb", gbar, J))
    g = 0.5 * (g + g.T)
    return phi, J, gbar, g


def build_frame(
    m: AmbientManifold,
    f: Immersion,
    u,
    plan: ChartPlan,
    order: int = 2,
    screen_fn: Optional[Callable] = None,
    rigging_fn: Optional[Callable] = None,
    screen_transversal_fn: Optional[Callable] = None,
) -> NullFrame:
    """
    Radical, screen and screen-transversal frames at u with the plan's discrete choices.

    Args:
        screen_fn: chart point -> (n−r, n) candidate tangent vectors replacing the canonical ones
        rigging_fn: chart point -> (r, N) transversal fields; the screen becomes the one it induces
        screen_transversal_fn: chart point -> (k−r, N) screen-transversal fields
    """
    u = np.asarray(u, dtype=float)
    phi, J, gbar, g = submanifold_jets(m, f, u, order)
    n, k, r = plan.n, plan.k, plan.r
    ulift = scalar.lift(u, order=order)

    xi_coords = radical_basis(g, plan.tangent_pivots)
    xi = scalar.einsum("ea,ia->ie", J, xi_coords)

    source = "canonical"
    if screen_fn is not None:
        candidates = list(screen_fn(ulift))
        source = "user"
    else:
        candidates = [np.asarray(c) for c in plan.screen_candidates]
    if rigging_fn is not None and screen_fn is None:
        rig = rigging_fn(ulift)
        candidates = [_project_along_rigging(c, J, gbar, rig, xi_coords) for c in candidates]
        source = "rigging"
    accept = [True] * len(candidates)
    screen_list, screen_signs, _ = signed_gram_schmidt(candidates, g, accept=accept)
    if len(screen_list) != n - r:
        raise ScreenSelectionError(f"Expected {n - r} screen vectors, got {len(screen_list)}")
    screen_coords = _rows([_as_jet(v, g) for v in screen_list], n, g)
    screen = scalar.einsum("ea,ia->ie", J, screen_coords)

    if k == r:
        st = _empty(m.dim, g)
        st_signs = np.zeros(0)
    elif screen_transversal_fn is not None:
        st = screen_transversal_fn(ulift)
        st = _as_jet(st, g)
        gram = scalar.einsum("ie,je->ij", st, scalar.einsum("ef,jf->je", gbar, st))
        st_signs = np.sign(np.diag(gram.value))
    else:
        A = scalar.einsum("ea,ef->af", J, gbar)
        scale = float(np.max(np.abs(A.value))) or 1.0
        if _relative_det(A.value[:, list(plan.normal_pivots)], scale) < config.PIVOT_TOL:
            raise RechartError(f"Normal pivot block {plan.normal_pivots} is ill-conditioned at {u.tolist()}")
        normals = _normal_basis(A, plan.normal_pivots, plan.normal_free)
        w_list, st_signs, _ = signed_gram_schmidt(list(normals), gbar, accept=plan.normal_accept)
        st = _rows(w_list, m.dim, g)

    return NullFrame(
        base=u,
        n=n,
        k=k,
        r=r,
        classification=plan.classification,
        phi=phi,
        jacobian=J,
        ambient_metric=gbar,
        metric=g,
        xi_coords=xi_coords,
        xi=xi,
        screen_coords=screen_coords,
        screen=screen,
        screen_signs=np.asarray(screen_signs, dtype=float),
        screen_transversal=st,
        st_signs=np.asarray(st_signs, dtype=float),
        screen_source=source,
    )


def _as_jet(v, like: DScalar) -> DScalar:
    if isinstance(v, DScalar):
        return v
    return scalar.constant(v, like.nvars, like.order)


def _project_along_rigging(candidate, J, gbar, rig, xi_coords):
    """P c = c − Σ ωᵢ(c) ξᵢ with ωᵢ(c) = ḡ(J c, Nᵢ)."""
    omega_c = scalar.einsum("ie,e->i", rig, scalar.einsum("ef,f->e", gbar, J @ candidate))
    return candidate - scalar.einsum("i,ia->a", omega_c, xi_coords)


def screen_basis(m: AmbientManifold, f: Immersion, u, pm: Optional[PullbackMetric] = None):
    """Canonical screen at u as (tangent-coordinate vectors, signs), pivots chosen at u."""
    u = np.asarray(u, dtype=float)
    pm = pullback(m, f, u) if pm is None else pm
    rank = tensors.numerical_rank(pm.matrix)
    if rank == pm.matrix.shape[0]:
        raise NotNullError("Pullback metric is nondegenerate; no screen to choose")
    pivots = best_principal_subset(pm.matrix, rank)
    order = _screen_candidate_order(pm.matrix, pivots)
    vectors, signs, _ = signed_gram_schmidt([np.asarray(c) for c in order], pm.matrix, count=rank)
    return np.array(vectors), signs

