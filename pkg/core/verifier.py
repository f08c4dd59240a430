"""
Identity checks on the induced geometry.

Every check turns one structural identity into a pointwise residual: the
"direct" side comes from quantities computed without the identity (∇̃ and R̃
from the Christoffel symbols of g̃, ∇g̃ from component derivatives), the
predicted side from the induced objects.  Checks are grouped in suites and
aggregated over sample points into IdentityCheck records.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from core import tensors
from core.ambient import christoffel, christoffel_jet
from core.induced import GeometrySetup, InducedGeometry, connection_values, rigged_values
from core.oracle import DEFAULT_FD, FinDiffConfig, fd_gradient, fd_hessian, max_discrepancy
from core.rigging import FrameDual, exterior_derivative, is_conformal_rigging
from core.submanifold import pullback
from utils import config
from utils.errors import UnsupportedError

logging.basicConfig(format="%(asctime)s - %(name)s - %(levelname)s - %(message)s")
logger = logging.getLogger("NullRig")

# Sign constants multiplying the ε-dependent groups of the rigged-metric formulas.
# Settled once by `adjudicate` on the catalog and frozen here.
DOCUMENTED_SIGNS: Dict[str, int] = {
    "lemma-3.3:shape-N": -1,
    "lemma-3.3:tau": 1,
    "prop-4.1:shape-xi": 1,
}


@dataclass
class Measurement:
    """Outcome of one check at one sample point; residual None means the check did not run at this point."""

    residual: Optional[float] = None
    skip: Optional[str] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)


@dataclass
class CheckContext:
    setup: GeometrySetup
    expected: Mapping[str, object] = field(default_factory=dict)
    declared_closed: Optional[bool] = None
    oracle: bool = False
    signs: Mapping[str, int] = field(default_factory=lambda: dict(DOCUMENTED_SIGNS))
    fd: FinDiffConfig = DEFAULT_FD


@dataclass
class IdentityCheck:
    """Aggregated outcome of one check over the sample set."""

    id: str
    suite: str
    tolerance: float
    residuals: List[float] = field(default_factory=list)
    status: str = "pass"
    skip_reason: Optional[str] = None
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def samples(self) -> int:
        return len(self.residuals)

    @property
    def max_residual(self) -> Optional[float]:
        return max(self.residuals) if self.residuals else None

    @property
    def mean_residual(self) -> Optional[float]:
        return float(np.mean(self.residuals)) if self.residuals else None

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "suite": self.suite,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "status": self.status,
        }
        if self.skip_reason is not None:
            out["skip_reason"] = self.skip_reason
        if self.diagnostics:
            out["diagnostics"] = self.diagnostics
        return out


def _max(*arrays) -> float:
    values = [float(np.max(np.abs(a))) for a in arrays if a is not None and np.size(a)]
    return max(values, default=0.0)


def _in_frame(tensor: np.ndarray, frame: np.ndarray, slots: int) -> np.ndarray:
    """Contract the leading `slots` chart axes of a tensor with the adapted tangent frame."""
    out = tensor
    for axis in range(slots):
        out = np.moveaxis(np.tensordot(frame, out, axes=([1], [axis])), 0, axis)
    return out


# -- shared building blocks ------------------------------------------------------------


def shape_pairings(geo: InducedGeometry):
    """(g(A*ᵢ ∂a, P∂b), g(A_Nᵢ ∂a, P∂b)) as [i, a, b] arrays."""
    gP = geo.g @ geo.P
    a_star = np.einsum("ica,cb->iab", geo.A_xi_star, gP)
    a_n = np.einsum("ica,cb->iab", geo.A_N, gP)
    return a_star, a_n


def correction_forms(geo: InducedGeometry, signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> np.ndarray:
    """κ[i, a, b] with ∇̃_∂a ∂b = ∇_∂a ∂b + Σᵢ κᵢ(∂a, ∂b) ξᵢ for a closed normalization."""
    a_star, a_n = shape_pairings(geo)
    om, tau = geo.omega, geo.tau_diag
    return 0.5 * (
        2.0 * signs["prop-4.1:shape-xi"] * geo.sign * a_star
        - a_n
        - np.swapaxes(a_n, 1, 2)
        + np.einsum("ia,ib->iab", om, tau)
        + np.einsum("ib,ia->iab", om, tau)
    )


def lemma_33_prediction(geo: InducedGeometry, signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> np.ndarray:
    """Predicted (∇_∂a g̃)(∂b, ∂c)."""
    eps = geo.sign
    a_star, a_n = shape_pairings(geo)
    group = a_star + signs["lemma-3.3:shape-N"] * eps * a_n
    om = geo.omega
    return (
        np.einsum("ib,iac->abc", om, group)
        + np.einsum("ic,iab->abc", om, group)
        + 2.0 * signs["lemma-3.3:tau"] * eps * np.einsum("ia,ib,ic->abc", geo.tau_diag, om, om)
    )


def lemma_33_residuals(geo: InducedGeometry, signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> np.ndarray:
    """Residual over all frame-direction triples."""
    diff = geo.nabla_g_tilde - lemma_33_prediction(geo, signs)
    return _in_frame(diff, geo.tangent_frame, 3)


def check_lemma_33(geo: InducedGeometry, X, Y, Z, signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> float:
    """|(∇_X g̃)(Y, Z) − predicted| for chart-component vectors X, Y, Z."""
    diff = geo.nabla_g_tilde - lemma_33_prediction(geo, signs)
    return abs(float(np.einsum("abc,a,b,c->", diff, X, Y, Z)))


def prop_41_residuals(geo: InducedGeometry, signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> np.ndarray:
    """∇̃ − ∇ − Σᵢ κᵢ ξᵢ as [c, a, b]."""
    kappa = correction_forms(geo, signs)
    return geo.conn_tilde - geo.conn - np.einsum("iab,ic->cab", kappa, geo.xi)


def check_prop_41(geo: InducedGeometry, X, Y, signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> float:
    """Largest chart component of ∇̃_X Y − predicted."""
    return _max(np.einsum("cab,a,b->c", prop_41_residuals(geo, signs), X, Y))


def prop_42_residuals(geo: InducedGeometry, signs: Mapping[str, int] = DOCUMENTED_SIGNS):
    """
    Residuals of the rigged curvature against the induced one.

    Returns:
        (screen [a, b, c, w], radical [a, b, c, j]) in chart components
    """
    R_t, R = geo.curvature.R_tilde, geo.curvature.R_ind
    P, gm, gt = geo.P, geo.g, geo.g_tilde
    kappa = correction_forms(geo, signs)
    a_star, _ = shape_pairings(geo)

    screen_direct = np.einsum("dcab,de,ew->abcw", R_t, gt, P)
    screen_induced = np.einsum("dcab,de,ew->abcw", R, gm, P)
    screen_corr = np.einsum("iac,ibw->abcw", kappa, a_star) - np.einsum("ibc,iaw->abcw", kappa, a_star)
    screen = screen_direct - screen_induced - screen_corr

    radical_direct = np.einsum("dcab,de,je->abcj", R_t, gt, geo.xi)
    r_xi = np.einsum("deab,je,df,fc->abcj", R, geo.xi, gm, P)
    an_xi = np.einsum("ica,ja,cd,db->ijb", geo.A_N, geo.xi, gm, P)
    tau = geo.tau_diag
    shape_terms = 0.5 * (np.einsum("ijb,iac->abcj", an_xi, a_star) - np.einsum("ija,ibc->abcj", an_xi, a_star))
    tau_terms = 0.5 * (np.einsum("ja,jbc->abcj", tau, a_star) - np.einsum("jb,jac->abcj", tau, a_star))
    radical = radical_direct - (-r_xi - shape_terms - tau_terms)
    return screen, radical


def check_prop_42(geo: InducedGeometry, X, Y, Z, W, signs: Mapping[str, int] = DOCUMENTED_SIGNS):
    """(screen residual at W, largest radical residual over ξⱼ) for chart-component vectors."""
    screen, radical = prop_42_residuals(geo, signs)
    s = abs(float(np.einsum("abcw,a,b,c,w->", screen, X, Y, Z, W)))
    return s, _max(np.einsum("abcj,a,b,c->j", radical, X, Y, Z))


def gauss_residuals(geo: InducedGeometry):
    """
    ḡ(R̄(X, Y)PZ, PU) − g(R(X, Y)PZ, PU) − Σᵢ[h^lᵢ(X, PZ) h*ᵢ(Y, PU) − h^lᵢ(Y, PZ) h*ᵢ(X, PU)].

    Returns:
        (residual, residual with Z unprojected on the induced side, product terms), all [a, b, c, d]
    """
    J, P = geo.jacobian, geo.P
    JP = J @ P
    lowered = tensors.lower_curvature(geo.curvature.R_bar, geo.ambient_metric)
    direct = np.einsum("ABCD,Aa,Bb,Cc,Dd->abcd", lowered, J, J, JP, JP)
    induced = np.einsum("feab,ec,fg,gd->abcd", geo.curvature.R_ind, P, geo.g, P)
    unprojected = np.einsum("fcab,fg,gd->abcd", geo.curvature.R_ind, geo.g, P)
    hl_p = np.einsum("iae,ec->iac", geo.h_l, P)
    products = np.einsum("iac,ibd->abcd", hl_p, geo.h_star) - np.einsum("ibc,iad->abcd", hl_p, geo.h_star)
    return direct - induced - products, direct - unprojected - products, products


@dataclass
class ScreenFit:
    conformal: bool
    phi: List[float]
    residual: List[float]
    both_zero: List[bool]


def check_conformal_screen(geo: InducedGeometry, tol: float = config.FIRST_ORDER_TOL) -> ScreenFit:
    """Least-squares φᵢ with g(A_Nᵢ X, PY) ≈ φᵢ g(A*ᵢ X, PY) over chart pairs."""
    a_star, a_n = shape_pairings(geo)
    fit = ScreenFit(True, [], [], [])
    for i in range(a_star.shape[0]):
        a, n = a_star[i], a_n[i]
        a_norm, n_norm = float(np.max(np.abs(a))), float(np.max(np.abs(n)))
        if a_norm < tol and n_norm < tol:
            fit.phi.append(0.0)
            fit.residual.append(0.0)
            fit.both_zero.append(True)
            continue
        fit.both_zero.append(False)
        if a_norm < tol:
            fit.phi.append(float("nan"))
            fit.residual.append(n_norm)
            fit.conformal = False
            continue
        phi = float(np.sum(a * n) / np.sum(a * a))
        residual = float(np.max(np.abs(n - phi * a)))
        fit.phi.append(phi)
        fit.residual.append(residual)
        if residual >= tol or abs(phi) < tol:
            fit.conformal = False
    return fit


def rigged_index_expected(geo: InducedGeometry) -> int:
    """index(g̃): q − q⊥ − r for ε = +1 and q − q⊥ for ε = −1, with q⊥ the index of S(TM⊥)."""
    q, _, _ = tensors.signature(geo.ambient_metric)
    q_perp = int(np.sum(geo.frame.st_signs < 0))
    return q - q_perp - geo.frame.r if geo.sign == 1 else q - q_perp


# -- frames suite -------------------------------------------------------------------------


def _frame_arrays(geo: InducedGeometry):
    f = geo.frame
    return f.xi.value, f.screen.value, f.transversal.value, f.screen_transversal.value, geo.ambient_metric


def frame_radical(geo, ctx) -> Measurement:
    xi, _, _, _, gbar = _frame_arrays(geo)
    return Measurement(_max(xi @ gbar @ geo.jacobian, geo.g @ geo.xi.T))


def frame_screen(geo, ctx) -> Measurement:
    xi, screen, _, W, gbar = _frame_arrays(geo)
    gram = screen @ gbar @ screen.T - np.diag(geo.frame.screen_signs)
    residual = _max(gram, screen @ gbar @ xi.T, W @ gbar @ geo.jacobian)
    diagnostics = {}
    if W.shape[0]:
        det = abs(float(np.linalg.det(W @ gbar @ W.T)))
        diagnostics["screen-transversal-det"] = det
        if det <= config.NONDEGENERACY_FLOOR:
            residual = max(residual, 1.0)
    return Measurement(residual, diagnostics=diagnostics)


def rigging_duality(geo, ctx) -> Measurement:
    xi, _, N, _, gbar = _frame_arrays(geo)
    return Measurement(_max(N @ gbar @ xi.T - np.eye(xi.shape[0])))


def rigging_null(geo, ctx) -> Measurement:
    _, _, N, _, gbar = _frame_arrays(geo)
    return Measurement(_max(N @ gbar @ N.T))


def rigging_orthogonality(geo, ctx) -> Measurement:
    _, screen, N, W, gbar = _frame_arrays(geo)
    return Measurement(_max(N @ gbar @ screen.T, N @ gbar @ W.T))


def decomposition_tangent(geo, ctx) -> Measurement:
    """X = Σ ωᵢ(X) ξᵢ + Σ ε_a g(X, e_a) e_a for every chart direction."""
    S = geo.screen
    signs = geo.frame.screen_signs
    rebuilt = geo.omega.T @ geo.xi + (S @ geo.g).T @ (signs[:, None] * S)
    return Measurement(_max(np.eye(geo.g.shape[0]) - rebuilt))


def decomposition_ambient(geo, ctx) -> Measurement:
    """Every ambient coordinate vector is recovered from its four frame parts."""
    dual = FrameDual(geo.frame)
    basis = np.eye(geo.ambient_metric.shape[0])
    rebuilt = dual.reconstruct(dual.split(basis)).value
    diagnostics = {f"derivative-{key}": value for key, value in geo.residuals.items()}
    return Measurement(max(_max(basis - rebuilt), *geo.residuals.values()), diagnostics=diagnostics)


def projection(geo, ctx) -> Measurement:
    P = geo.P
    return Measurement(_max(P @ P - P, P @ geo.xi.T))


def omega_duality(geo, ctx) -> Measurement:
    om = geo.omega
    return Measurement(_max(om @ geo.xi.T - np.eye(om.shape[0]), om @ geo.screen.T))


def pregeodesic(geo, ctx) -> Measurement:
    """∇̄_ξᵢ ξᵢ has no component off ξᵢ."""
    xi, _, N, _, gbar = _frame_arrays(geo)
    V = np.einsum("ia,aie->ie", geo.xi, geo.dxi)
    along = np.einsum("ie,ef,if->i", V, gbar, N)
    return Measurement(_max(V - along[:, None] * xi), diagnostics={"acceleration-along-xi": _max(along)})


def oracle_equivalence(geo, ctx) -> Measurement:
    """Jet derivatives against Richardson central differences."""
    if not ctx.oracle:
        return Measurement()
    setup, fd, u = ctx.setup, ctx.fd, geo.base
    m, f = setup.ambient, setup.immersion
    frame = geo.frame

    def pulled(v):
        return pullback(m, f, v).matrix

    def rigged(v):
        return rigged_values(setup, v)

    discrepancies = {
        "ambient-metric": max_discrepancy(frame.ambient_metric.grad, fd_gradient(lambda v: m.metric(f.map_fn(v)), u, fd)),
        "ambient-christoffel": max_discrepancy(
            christoffel_jet(m, geo.point, 1).grad, fd_gradient(lambda x: christoffel(m, x), geo.point, fd)
        ),
        "pullback-metric": max_discrepancy(frame.metric.grad, fd_gradient(pulled, u, fd)),
        "pullback-metric-hessian": max_discrepancy(frame.metric.hess, fd_hessian(pulled, u, fd)),
        "omega": max_discrepancy(geo.rigging.omega.grad, fd_gradient(lambda v: rigged(v)["omega"], u, fd)),
        "rigged-metric-hessian": max_discrepancy(
            geo.rigged.matrix.hess, fd_hessian(lambda v: rigged(v)["g_tilde"], u, fd)
        ),
        "induced-connection": max_discrepancy(geo.dconn, fd_gradient(lambda v: connection_values(setup, v), u, fd)),
    }
    worst = max(discrepancies, key=discrepancies.get)
    return Measurement(discrepancies[worst], diagnostics={"worst-quantity": worst})


def _extract_conformal_factor(geo):
    return np.array(check_conformal_screen(geo).phi)


EXTRACTORS: Dict[str, Callable[[InducedGeometry], object]] = {
    "rank_r": lambda geo: geo.frame.r,
    "g_tilde": lambda geo: geo.g_tilde,
    "rigged_index": lambda geo: geo.rigged.index,
    "h_l": lambda geo: geo.h_l,
    "h_s": lambda geo: geo.h_s if geo.h_s is not None else np.zeros(0),
    "A_N": lambda geo: geo.A_N,
    "A_xi_star": lambda geo: geo.A_xi_star,
    "tau": lambda geo: geo.tau,
    "tau_of_xi": lambda geo: np.einsum("ia,ja->ij", geo.tau_diag, geo.xi),
    "omega": lambda geo: geo.omega,
    "transversal": lambda geo: geo.frame.transversal.value,
    "R_ind": lambda geo: geo.curvature.R_ind,
    "R_tilde": lambda geo: geo.curvature.R_tilde,
    "R_bar": lambda geo: geo.curvature.R_bar,
    "closed": lambda geo: float(geo.rigging.closed_flag == "closed"),
    "conformal_factor": _extract_conformal_factor,
}


def expected_values(geo, ctx) -> Measurement:
    """Computed quantities against the catalog's tagged values."""
    if not ctx.expected:
        return Measurement(skip="no expected values for this example")
    worst, diagnostics = 0.0, {}
    for name, expected in sorted(ctx.expected.items()):
        if name not in EXTRACTORS:
            raise UnsupportedError(f"No extractor for expected quantity '{name}'")
        computed = np.asarray(EXTRACTORS[name](geo), dtype=float)
        target = np.asarray(expected.at(geo.base), dtype=float)
        diff = _max(computed - target) if computed.size or target.size else 0.0
        if not np.isfinite(diff):
            diff = float("inf")
        diagnostics[name] = f"{diff:.3e} [{expected.tag}]"
        worst = max(worst, diff)
    return Measurement(worst, diagnostics=diagnostics)


# -- metric suite ----------------------------------------------------------------------------


def lemma_31(geo, ctx) -> Measurement:
    det = abs(geo.rigged.det)
    return Measurement(0.0 if det > config.NONDEGENERACY_FLOOR else 1.0, diagnostics={"abs-det": det})


def lemma_32(geo, ctx) -> Measurement:
    expected = rigged_index_expected(geo)
    return Measurement(
        float(abs(geo.rigged.index - expected)),
        diagnostics={"index": geo.rigged.index, "expected-index": expected},
    )


def rigged_omega(geo, ctx) -> Measurement:
    """g̃(ξᵢ, ·) = ε ωᵢ."""
    return Measurement(_max(geo.xi @ geo.g_tilde - geo.sign * geo.omega))


def lemma_33(geo, ctx) -> Measurement:
    res = lemma_33_residuals(geo, ctx.signs)
    return Measurement(_max(res), diagnostics={"direct-norm": _max(geo.nabla_g_tilde)})


def nonmetricity_check(geo: InducedGeometry) -> float:
    """Largest frame residual of (∇_X g)(Y, Z) = ḡ(h^l(X, Y), Z) + ḡ(h^l(X, Z), Y)."""
    om = geo.omega
    predicted = np.einsum("iab,ic->abc", geo.h_l, om) + np.einsum("iac,ib->abc", geo.h_l, om)
    return _max(_in_frame(geo.nabla_g - predicted, geo.tangent_frame, 3))


def nonmetricity(geo, ctx) -> Measurement:
    return Measurement(nonmetricity_check(geo))


def closed_normalization(geo, ctx) -> Measurement:
    d = _max(exterior_derivative(geo.rigging))
    if ctx.declared_closed is None:
        return Measurement(skip="closedness not declared", diagnostics={"max-d-omega": d})
    computed = geo.rigging.closed_flag == "closed"
    return Measurement(
        0.0 if computed == ctx.declared_closed else 1.0,
        diagnostics={"max-d-omega": d, "closed": computed},
    )


# -- connection suite ------------------------------------------------------------------------------


def gauss_weingarten(geo, ctx) -> Measurement:
    torsion = geo.conn - np.swapaxes(geo.conn, 1, 2)
    return Measurement(max(_max(torsion), *geo.residuals.values()), diagnostics={"torsion": _max(torsion)})


def h_symmetry(geo, ctx) -> Measurement:
    hs = geo.h_s - np.swapaxes(geo.h_s, 1, 2) if geo.h_s is not None else None
    return Measurement(_max(geo.h_l - np.swapaxes(geo.h_l, 1, 2), hs))


def fundamental_relations_check(geo: InducedGeometry) -> Dict[str, float]:
    """Form pairing, A_N pairing, h^lᵢ(X, ξᵢ) = 0 and A*ᵢ ξᵢ = 0, one residual each."""
    a_star, a_n = shape_pairings(geo)
    form = np.einsum("iae,eb->iab", geo.h_l, geo.P) - a_star
    star = np.einsum("iae,eb->iab", geo.h_star, geo.P) - a_n
    radical = np.einsum("iia->ia", geo.h_l_radical)
    kernel = np.einsum("ica,ia->ic", geo.A_xi_star, geo.xi)
    return {"form-pairing": _max(form), "shape-N-pairing": _max(star), "radical": _max(radical), "kernel": _max(kernel)}


def relations_219(geo, ctx) -> Measurement:
    parts = fundamental_relations_check(geo)
    return Measurement(max(parts.values()), diagnostics=parts)


def self_adjoint(geo, ctx) -> Measurement:
    S = geo.screen
    M = np.einsum("ica,pa,cd,qd->ipq", geo.A_xi_star, S, geo.g, S)
    return Measurement(_max(M - np.swapaxes(M, 1, 2)))


def relations_215_216(geo, ctx) -> Measurement:
    if geo.frame.classification != "r-lightlike":
        return Measurement(skip="coisotropic: screen transversal bundle is trivial")
    W, gbar = geo.frame.screen_transversal.value, geo.ambient_metric
    gram = W @ gbar @ W.T
    lhs = np.einsum("pxy,pq->qxy", geo.h_s, gram) + np.einsum("qjx,jy->qxy", geo.D_l, geo.omega)
    rhs = np.einsum("qcx,cy->qxy", geo.A_W, geo.g)
    first = lhs - rhs
    second = np.einsum("ixp,pq->ixq", geo.D_s, gram) - np.einsum("ic,qcx->ixq", geo.omega, geo.A_W)
    return Measurement(max(_max(first), _max(second)), diagnostics={"metric-2.15": _max(first), "metric-2.16": _max(second)})


def prop_41(geo, ctx) -> Measurement:
    if geo.frame.classification != "coisotropic":
        return Measurement(skip="not coisotropic")
    res = prop_41_residuals(geo, ctx.signs)
    if geo.rigging.closed_flag != "closed":
        return Measurement(skip="normalization not closed", diagnostics={"raw-residual": _max(res)})
    correction = np.einsum("iab,ic->cab", correction_forms(geo, ctx.signs), geo.xi)
    return Measurement(
        _max(res),
        diagnostics={"correction-norm": _max(correction), "shape-xi-norm": _max(geo.A_xi_star)},
    )


def rigged_levi_civita(geo, ctx) -> Measurement:
    torsion = geo.conn_tilde - np.swapaxes(geo.conn_tilde, 1, 2)
    return Measurement(_max(torsion, geo.nabla_tilde_g_tilde))


def ambient_metricity(geo, ctx) -> Measurement:
    return Measurement(geo.ambient_metricity)


# -- curvature suite -----------------------------------------------------------------------------------


def _symmetry_measurement(lowered: np.ndarray) -> Measurement:
    parts = tensors.curvature_symmetry_residuals(lowered)
    return Measurement(max(parts.values()), diagnostics=parts)


def ambient_curvature_symmetries(geo, ctx) -> Measurement:
    return _symmetry_measurement(tensors.lower_curvature(geo.curvature.R_bar, geo.ambient_metric))


def rigged_curvature_symmetries(geo, ctx) -> Measurement:
    return _symmetry_measurement(tensors.lower_curvature(geo.curvature.R_tilde, geo.g_tilde))


def induced_curvature_antisymmetry(geo, ctx) -> Measurement:
    R = geo.curvature.R_ind
    return Measurement(_max(R + np.swapaxes(R, 2, 3)))


def gauss_equation_check(geo: InducedGeometry) -> Dict[str, float]:
    """
    Tangential Gauss equation of a coisotropic submanifold over frame directions.

    Returns:
        {"residual", "unprojected-z-residual", "product-norm"}

    Raises:
        UnsupportedError: the submanifold is not coisotropic
    """
    if geo.frame.classification != "coisotropic":
        raise UnsupportedError("not coisotropic")
    residual, unprojected, products = gauss_residuals(geo)
    T = geo.tangent_frame
    return {
        "residual": _max(_in_frame(residual, T, 4)),
        "unprojected-z-residual": _max(_in_frame(unprojected, T, 4)),
        "product-norm": _max(products),
    }


def gauss_222(geo, ctx) -> Measurement:
    parts = gauss_equation_check(geo)
    residual = parts.pop("residual")
    return Measurement(residual, diagnostics=parts)


def _prop_42_precondition(geo) -> Optional[str]:
    if geo.frame.classification != "coisotropic":
        return "not coisotropic"
    if geo.rigging.closed_flag != "closed":
        return "normalization not closed"
    return None


def prop_42_screen(geo, ctx) -> Measurement:
    reason = _prop_42_precondition(geo)
    if reason:
        return Measurement(skip=reason)
    screen, _ = prop_42_residuals(geo, ctx.signs)
    _, _, products = gauss_residuals(geo)
    return Measurement(
        _max(_in_frame(screen, geo.tangent_frame, 4)),
        diagnostics={"rigged-curvature-norm": _max(geo.curvature.R_tilde), "product-norm": _max(products)},
    )


def prop_42_radical(geo, ctx) -> Measurement:
    reason = _prop_42_precondition(geo)
    if reason:
        return Measurement(skip=reason)
    _, radical = prop_42_residuals(geo, ctx.signs)
    tau_xi = np.einsum("ia,ja->ij", geo.tau_diag, geo.xi)
    return Measurement(_max(_in_frame(radical, geo.tangent_frame, 3)), diagnostics={"tau-of-xi": _max(tau_xi)})


# -- conformal suite ----------------------------------------------------------------------------------------


def lemma_34(geo, ctx) -> Measurement:
    """A conformal rigging has τᵢ(ξᵢ) = 0 and geodesic ξᵢ."""
    if ctx.setup.extension is None:
        return Measurement(skip="no ambient extension of the rigging")
    fit = is_conformal_rigging(ctx.setup.ambient, ctx.setup.extension, geo.point)
    if not all(fit.conformal):
        return Measurement(skip="rigging not conformal", diagnostics={"conformal-residual": max(fit.residual)})
    tau_xi = np.einsum("ia,ia->i", geo.tau_diag, geo.xi)
    accel = np.einsum("ia,aie->ie", geo.xi, geo.dxi)
    return Measurement(
        max(_max(tau_xi), _max(accel)),
        diagnostics={"tau-of-xi": _max(tau_xi), "acceleration": _max(accel), "conformal-factor": max(fit.lam, key=abs)},
    )


def conformal_screen(geo, ctx) -> Measurement:
    fit = check_conformal_screen(geo)
    diagnostics = {"phi": fit.phi, "fit-residual": max(fit.residual)}
    if all(fit.both_zero):
        diagnostics["both-zero"] = True
        return Measurement(0.0, diagnostics=diagnostics)
    if not fit.conformal:
        return Measurement(skip="screen not conformal", diagnostics=diagnostics)
    return Measurement(max(fit.residual), diagnostics=diagnostics)


# -- registry -------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckDef:
    id: str
    suite: str
    tolerance: float
    fn: Callable[[InducedGeometry, CheckContext], Measurement]


CHECKS: List[CheckDef] = [
    CheckDef("frame-radical", "frames", config.FRAME_TOL, frame_radical),
    CheckDef("frame-screen", "frames", config.FRAME_TOL, frame_screen),
    CheckDef("rigging-duality", "frames", config.FRAME_TOL, rigging_duality),
    CheckDef("rigging-null", "frames", config.FRAME_TOL, rigging_null),
    CheckDef("rigging-orthogonality", "frames", config.FRAME_TOL, rigging_orthogonality),
    CheckDef("decomposition-tangent", "frames", config.FRAME_TOL, decomposition_tangent),
    CheckDef("decomposition-ambient", "frames", config.FRAME_TOL, decomposition_ambient),
    CheckDef("projection", "frames", config.FRAME_TOL, projection),
    CheckDef("omega-duality", "frames", config.FRAME_TOL, omega_duality),
    CheckDef("pregeodesic", "frames", config.RELATION_TOL, pregeodesic),
    CheckDef("oracle-equivalence", "frames", config.ORACLE_TOL, oracle_equivalence),
    CheckDef("expected-values", "frames", config.FIRST_ORDER_TOL, expected_values),
    CheckDef("lemma-3.1", "metric", 0.5, lemma_31),
    CheckDef("lemma-3.2", "metric", 0.5, lemma_32),
    CheckDef("rigged-omega", "metric", config.ALGEBRAIC_TOL, rigged_omega),
    CheckDef("lemma-3.3", "metric", config.FIRST_ORDER_TOL, lemma_33),
    CheckDef("nonmetricity-2.10", "metric", config.RELATION_TOL, nonmetricity),
    CheckDef("closed-normalization", "metric", 0.5, closed_normalization),
    CheckDef("gauss-weingarten", "connection", config.RELATION_TOL, gauss_weingarten),
    CheckDef("h-symmetry", "connection", config.ALGEBRAIC_TOL, h_symmetry),
    CheckDef("relations-2.19", "connection", config.RELATION_TOL, relations_219),
    CheckDef("self-adjoint", "connection", config.RELATION_TOL, self_adjoint),
    CheckDef("relations-2.15-2.16", "connection", config.RELATION_TOL, relations_215_216),
    CheckDef("prop-4.1-closed", "connection", config.FIRST_ORDER_TOL, prop_41),
    CheckDef("rigged-levi-civita", "connection", config.RELATION_TOL, rigged_levi_civita),
    CheckDef("ambient-metricity", "connection", config.RELATION_TOL, ambient_metricity),
    CheckDef("ambient-curvature-symmetries", "curvature", config.RELATION_TOL, ambient_curvature_symmetries),
    CheckDef("rigged-curvature-symmetries", "curvature", config.FIRST_ORDER_TOL, rigged_curvature_symmetries),
    CheckDef("induced-curvature-antisymmetry", "curvature", config.FIRST_ORDER_TOL, induced_curvature_antisymmetry),
    CheckDef("gauss-2.22", "curvature", config.FIRST_ORDER_TOL, gauss_222),
    CheckDef("prop-4.2-screen", "curvature", config.CURVATURE_TOL, prop_42_screen),
    CheckDef("prop-4.2-radical", "curvature", config.CURVATURE_TOL, prop_42_radical),
    CheckDef("lemma-3.4", "conformal", config.RELATION_TOL, lemma_34),
    CheckDef("conformal-screen", "conformal", config.FIRST_ORDER_TOL, conformal_screen),
]

CHECK_IDS = tuple(c.id for c in CHECKS)


def select_checks(suite: str = "all") -> List[CheckDef]:
    if suite == "all":
        return list(CHECKS)
    return [c for c in CHECKS if c.suite == suite]


def resolve_tolerance(check: CheckDef, overrides: Mapping[str, float]) -> float:
    """Override by check id, then by suite, then "all"; otherwise the check's default."""
    for key in (check.id, check.suite, "all"):
        if key in overrides:
            return float(overrides[key])
    return check.tolerance


def evaluate(geo: InducedGeometry, ctx: CheckContext, checks: Sequence[CheckDef]) -> Dict[str, Measurement]:
    """Run the given checks at one sample point."""
    out = {}
    for check in checks:
        try:
            out[check.id] = check.fn(geo, ctx)
        except UnsupportedError as e:
            out[check.id] = Measurement(skip=str(e))
    return out


def _merge_diagnostics(target: Dict[str, object], diagnostics: Mapping[str, object]) -> None:
    for key, value in diagnostics.items():
        old = target.get(key)
        if isinstance(value, (int, float)) and not isinstance(value, bool) and isinstance(old, (int, float)):
            target[key] = max(old, value, key=abs)
        elif key not in target:
            target[key] = value


def summarize(check: CheckDef, measurements: Sequence[Measurement], tolerance: Optional[float] = None) -> IdentityCheck:
    """Aggregate per-sample measurements; pass iff the largest residual is below tolerance."""
    tolerance = check.tolerance if tolerance is None else tolerance
    record = IdentityCheck(id=check.id, suite=check.suite, tolerance=tolerance)
    skipped = []
    for m in measurements:
        _merge_diagnostics(record.diagnostics, m.diagnostics)
        if m.skip is not None:
            skipped.append(m.skip)
        elif m.residual is not None:
            record.residuals.append(float(m.residual))

    if not record.residuals:
        record.status = "skipped"
        record.skip_reason = skipped[0] if skipped else "no sample was compared with the oracle"
        logger.info(f"{check.id}: skipped ({record.skip_reason})")
        return record
    if skipped:
        record.diagnostics["skipped-samples"] = len(skipped)
    worst = record.max_residual
    record.status = "pass" if worst < tolerance else "fail"
    if record.status == "pass":
        logger.info(f"{check.id}: pass (max {worst:.3e} < {tolerance:.1e})")
    else:
        logger.warning(f"{check.id}: FAIL (max {worst:.3e} >= {tolerance:.1e})")
    return record


# -- sign adjudication ---------------------------------------------------------------------------------------

_SIGN_OWNERS = {
    "lemma-3.3:shape-N": lambda geo, signs: _max(lemma_33_residuals(geo, signs)),
    "lemma-3.3:tau": lambda geo, signs: _max(lemma_33_residuals(geo, signs)),
    "prop-4.1:shape-xi": lambda geo, signs: _max(prop_41_residuals(geo, signs)),
}


def _owner_applies(name: str, geo: InducedGeometry) -> bool:
    if name.startswith("prop-4.1"):
        return geo.frame.classification == "coisotropic" and geo.rigging.closed_flag == "closed"
    return True


def adjudicate(geometries: Sequence[InducedGeometry], signs: Mapping[str, int] = DOCUMENTED_SIGNS) -> List[dict]:
    """
    Evaluate each documented sign constant at both values with the others frozen.

    Returns:
        one record per constant: both residuals, the minimizing value and whether it is the documented one
    """
    table = []
    for name in sorted(signs):
        owner = _SIGN_OWNERS[name]
        usable = [geo for geo in geometries if _owner_applies(name, geo)]
        residuals = {}
        for value in (1, -1):
            trial = dict(signs, **{name: value})
            residuals[value] = max((owner(geo, trial) for geo in usable), default=0.0)
        preferred = min((1, -1), key=lambda v: residuals[v])
        if residuals[1] == residuals[-1]:
            preferred = signs[name]
        table.append(
            {
                "constant": name,
                "documented": signs[name],
                "residual_plus": residuals[1],
                "residual_minus": residuals[-1],
                "preferred": preferred,
                "agrees": preferred == signs[name],
                "points": len(usable),
            }
        )
        log = logger.info if preferred == signs[name] else logger.warning
        log(f"sign {name}: +1 -> {residuals[1]:.3e}, -1 -> {residuals[-1]:.3e}, documented {signs[name]:+d}")
    return table
