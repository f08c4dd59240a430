"""
Induced geometry of a null submanifold at one chart point.

Ambient covariant derivatives of the tangent, radical, transversal and
screen-transversal fields are split along the adapted frame; the pieces are
the induced connection, the second fundamental forms, the shape operators and
the transversal connection forms.  Everything is computed on jets over the
chart coordinates, so derivatives of the results (needed for curvature) come
for free.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Optional

import numpy as np

from core import scalar, tensors
from core.ambient import AmbientManifold, ambient_curvature, christoffel, christoffel_jet, pull_back_jet
from core.rigging import FrameDual, Rigging, RiggedMetric, build_rigging, choose_seeds, projection_matrix, rigged_metric
from core.scalar import DScalar
from core.submanifold import ChartPlan, Immersion, NullFrame, build_frame, make_chart_plan

logger = logging.getLogger("NullRig")


@dataclass
class GeometrySetup:
    """
    Everything needed to evaluate the induced geometry at any chart point.

    Args:
        ambient: the ambient manifold
        immersion: the submanifold
        plan: frozen discrete choices (pivots, screen order, seeds)
        sign: ε in g̃ = g + ε Σ ωᵢ⊗ωᵢ
        screen_fn: optional user screen candidates
        rigging_fn: optional analytic transversal fields
        screen_transversal_fn: optional analytic screen-transversal fields
        extension: optional ambient extension of the transversal fields
    """

    ambient: AmbientManifold
    immersion: Immersion
    plan: ChartPlan
    sign: int = 1
    screen_fn: Optional[Callable] = None
    rigging_fn: Optional[Callable] = None
    screen_transversal_fn: Optional[Callable] = None
    extension: Optional[Callable] = None

    @property
    def screen_source(self) -> str:
        if self.screen_fn is not None:
            return "user"
        if self.rigging_fn is not None:
            return "rigging"
        return "canonical"


def plan_setup(
    ambient: AmbientManifold,
    immersion: Immersion,
    sign: int = 1,
    reference=None,
    **overrides,
) -> GeometrySetup:
    """Freeze the chart plan (including transversal seeds) at the reference point."""
    plan = make_chart_plan(ambient, immersion, reference)
    frame = build_frame(
        ambient,
        immersion,
        plan.reference,
        plan,
        order=1,
        screen_fn=overrides.get("screen_fn"),
        rigging_fn=overrides.get("rigging_fn"),
        screen_transversal_fn=overrides.get("screen_transversal_fn"),
    )
    seeds = choose_seeds(frame.xi.value, frame.ambient_metric.value)
    return GeometrySetup(ambient=ambient, immersion=immersion, plan=replace(plan, seeds=seeds), sign=sign, **overrides)


@dataclass
class CurvatureSet:
    """R̄ on tangent vectors, R of ∇ and R̃ of ∇̃, all as [d, c, a, b] arrays (R̄ in ambient indices)."""

    R_bar: np.ndarray
    R_ind: np.ndarray
    R_tilde: np.ndarray


@dataclass
class InducedGeometry:
    """
    Induced objects at one chart point, as plain arrays in chart components.

    Index layout: connection coefficients [c, a, b]; forms [i, a, b] with i the
    radical/transversal index and α the screen-transversal index; shape operators
    [i, c, a] act as (A X)^c = A[i, c, a] X^a; transversal forms τ[i, j, a] =
    ḡ(∇̄_∂a Nᵢ, ξⱼ).
    """

    base: np.ndarray
    point: np.ndarray
    frame: NullFrame
    rigging: Rigging
    rigged: RiggedMetric
    sign: int
    g: np.ndarray
    g_tilde: np.ndarray
    P: np.ndarray
    omega: np.ndarray
    xi: np.ndarray
    screen: np.ndarray
    conn: np.ndarray
    conn_tilde: np.ndarray
    h_l: np.ndarray
    h_s: Optional[np.ndarray]
    A_N: np.ndarray
    tau: np.ndarray
    D_s: Optional[np.ndarray]
    A_xi_star: np.ndarray
    nabla_star_t: np.ndarray
    h_l_radical: np.ndarray
    h_star: np.ndarray
    nabla_star: np.ndarray
    A_W: Optional[np.ndarray]
    D_l: Optional[np.ndarray]
    nabla_g: np.ndarray
    nabla_g_tilde: np.ndarray
    nabla_tilde_g_tilde: np.ndarray
    ambient_metric: np.ndarray
    ambient_metricity: float
    jacobian: np.ndarray
    dxi: np.ndarray
    curvature: CurvatureSet
    residuals: Dict[str, float] = field(default_factory=dict)
    dconn: Optional[np.ndarray] = None

    @property
    def tangent_frame(self) -> np.ndarray:
        """Adapted tangent directions: radical vectors first, then the screen."""
        return np.concatenate([self.xi, self.screen], axis=0)

    @property
    def tau_diag(self) -> np.ndarray:
        return np.einsum("iia->ia", self.tau)

    def values(self) -> dict:
        """Summary used by `describe`."""
        out = {
            "chart_point": self.base.tolist(),
            "ambient_point": self.point.tolist(),
            "rigging_source": self.rigging.source,
            "closed": self.rigging.closed_flag,
            "rigged_metric": self.g_tilde.tolist(),
            "rigged_index": self.rigged.index,
            "omega": self.omega.tolist(),
            "null_second_fundamental_form": self.h_l.tolist(),
            "shape_operator_N": self.A_N.tolist(),
            "shape_operator_xi_star": self.A_xi_star.tolist(),
            "tau": self.tau.tolist(),
        }
        out.update(self.frame.values())
        return out


def _along(field_jet: DScalar, gamma_bar: DScalar, J1: DScalar, n: int) -> DScalar:
    """D[a, p, e] = (∇̄_∂a V_p)^e for fields V_p(u) along the immersion."""
    if field_jet.shape[0] == 0:
        return scalar.constant(np.zeros((n, 0, field_jet.shape[1])), n, 1)
    derivative = scalar.stack([field_jet.partial(a) for a in range(n)])
    conn = scalar.einsum("ecd,ca->ead", gamma_bar, J1)
    return derivative + scalar.einsum("ead,pd->ape", conn, field_jet.truncate(1))


def _covariant_of_metric(metric: DScalar, conn: np.ndarray) -> np.ndarray:
    """(∇_a h)(b, c) = ∂_a h_bc − Γ^d_ab h_dc − Γ^d_ac h_bd for a metric jet h and coefficients Γ."""
    d = np.stack([metric.partial(a).value for a in range(metric.nvars)])
    h = metric.value
    return d - np.einsum("dab,dc->abc", conn, h) - np.einsum("dac,bd->abc", conn, h)


def _reconstruction_residual(dual: FrameDual, V: DScalar, parts) -> float:
    diff = scalar.value_of(V) - scalar.value_of(dual.reconstruct(parts))
    return float(np.max(np.abs(diff))) if diff.size else 0.0


def induce(setup: GeometrySetup, u) -> InducedGeometry:
    """Evaluate the full induced geometry at the chart point u."""
    m, f, plan = setup.ambient, setup.immersion, setup.plan
    n, k, r = plan.n, plan.k, plan.r
    frame = build_frame(
        m,
        f,
        u,
        plan,
        order=2,
        screen_fn=setup.screen_fn,
        rigging_fn=setup.rigging_fn,
        screen_transversal_fn=setup.screen_transversal_fn,
    )
    frame, rig = build_rigging(frame, plan.seeds, setup.rigging_fn)
    dual = FrameDual(frame)
    rigged = rigged_metric(frame, rig, setup.sign)

    J = frame.jacobian
    J1 = J.truncate(1)
    x0 = frame.phi.value
    gamma_x = christoffel_jet(m, x0, order=1)
    gamma_bar = pull_back_jet(gamma_x, J.value)

    residuals = {}

    # ∇̄_∂a ∂b = ∇_∂a ∂b + h^l + h^s
    D_tan = _along(J.T, gamma_bar, J1, n)
    s_tan = dual.split(D_tan)
    residuals["tangent"] = _reconstruction_residual(dual, D_tan, s_tan)
    conn_jet = dual.tangent_coords(s_tan).transpose(2, 0, 1)
    h_l = np.transpose(s_tan.ltr.value, (2, 0, 1))
    h_s = np.transpose(s_tan.st.value, (2, 0, 1)) if s_tan.st is not None else None

    # ∇̄_∂a Nᵢ = −A_Nᵢ ∂a + Σⱼ τᵢⱼ(∂a) Nⱼ + D^s(∂a, Nᵢ)
    D_N = _along(frame.transversal, gamma_bar, J1, n)
    s_N = dual.split(D_N)
    residuals["transversal"] = _reconstruction_residual(dual, D_N, s_N)
    A_N = -np.transpose(scalar.value_of(dual.tangent_coords(s_N)), (1, 2, 0))
    tau = np.transpose(s_N.ltr.value, (1, 2, 0))
    D_s = np.transpose(s_N.st.value, (1, 0, 2)) if s_N.st is not None else None

    # ∇̄_∂a ξᵢ = −A*_ξᵢ ∂a + ∇*t_∂a ξᵢ + h^l(∂a, ξᵢ)
    D_xi = _along(frame.xi, gamma_bar, J1, n)
    s_xi = dual.split(D_xi)
    residuals["radical"] = _reconstruction_residual(dual, D_xi, s_xi)
    screen_coords = frame.screen_coords.value
    if n > r:
        A_star = -np.einsum("aib,bc->ica", s_xi.screen.value, screen_coords)
    else:
        A_star = np.zeros((r, n, n))
    nabla_star_t = np.transpose(s_xi.xi.value, (1, 2, 0))
    h_l_radical = np.transpose(s_xi.ltr.value, (1, 2, 0))

    # ∇̄_∂a W_α = −A_W ∂a + ∇^s W + D^l(∂a, W)
    if k > r:
        D_W = _along(frame.screen_transversal, gamma_bar, J1, n)
        s_W = dual.split(D_W)
        residuals["screen-transversal"] = _reconstruction_residual(dual, D_W, s_W)
        A_W = -np.transpose(scalar.value_of(dual.tangent_coords(s_W)), (1, 2, 0))
        D_l = np.transpose(s_W.ltr.value, (1, 2, 0))
    else:
        A_W = None
        D_l = None

    conn = conn_jet.value
    P_jet = projection_matrix(frame, rig)
    P = scalar.value_of(P_jet)
    omega = rig.omega.value

    # ∇_∂a (P ∂b) = ∇*_∂a P∂b + h*(∂a, P∂b)
    dP = np.stack([P_jet.partial(a).value for a in range(n)])
    nabla_P = dP + np.einsum("cad,db->acb", conn, P)
    h_star = np.einsum("ic,acb->iab", omega, nabla_P)
    nabla_star = nabla_P - np.einsum("iab,ic->acb", h_star, frame.xi_coords.value)

    gamma_tilde = tensors.levi_civita(rigged.matrix)
    ambient_g = frame.ambient_metric.value
    curvature = CurvatureSet(
        R_bar=ambient_curvature(m, x0),
        R_ind=tensors.curvature_of_connection(conn_jet),
        R_tilde=tensors.curvature_of_connection(gamma_tilde),
    )

    # ∂_a ḡ_bc − Γ̄^d_ab ḡ_dc − Γ̄^d_ac ḡ_bd with coordinate fields
    gamma_x0 = gamma_x.value
    dgbar = np.moveaxis(m.metric_jet(x0, 1).grad, -1, 0)
    ambient_metricity = dgbar - np.einsum("dab,dc->abc", gamma_x0, ambient_g) - np.einsum("dac,bd->abc", gamma_x0, ambient_g)

    return InducedGeometry(
        base=np.asarray(u, dtype=float),
        point=x0,
        frame=frame,
        rigging=rig,
        rigged=rigged,
        sign=setup.sign,
        g=frame.metric.value,
        g_tilde=rigged.matrix.value,
        P=P,
        omega=omega,
        xi=frame.xi_coords.value,
        screen=screen_coords,
        conn=conn,
        conn_tilde=gamma_tilde.value,
        h_l=h_l,
        h_s=h_s,
        A_N=A_N,
        tau=tau,
        D_s=D_s,
        A_xi_star=A_star,
        nabla_star_t=nabla_star_t,
        h_l_radical=h_l_radical,
        h_star=h_star,
        nabla_star=nabla_star,
        A_W=A_W,
        D_l=D_l,
        nabla_g=_covariant_of_metric(frame.metric, conn),
        nabla_g_tilde=_covariant_of_metric(rigged.matrix, conn),
        nabla_tilde_g_tilde=_covariant_of_metric(rigged.matrix, gamma_tilde.value),
        ambient_metric=ambient_g,
        ambient_metricity=float(np.max(np.abs(ambient_metricity))),
        jacobian=J.value,
        dxi=D_xi.value,
        curvature=curvature,
        residuals=residuals,
        dconn=conn_jet.grad,
    )


def gauss_weingarten(geometry: InducedGeometry, X, Y):
    """(∇_X Y, h^l(X, Y), h^s(X, Y)) for constant-coefficient tangent fields X, Y."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    nabla = np.einsum("cab,a,b->c", geometry.conn, X, Y)
    h_l = np.einsum("iab,a,b->i", geometry.h_l, X, Y)
    h_s = np.einsum("iab,a,b->i", geometry.h_s, X, Y) if geometry.h_s is not None else None
    return nabla, h_l, h_s


def weingarten_N(geometry: InducedGeometry, X):
    """(A_Nᵢ X, τᵢⱼ(X), D^s(X, Nᵢ)) per transversal index i."""
    X = np.asarray(X, dtype=float)
    A = np.einsum("ica,a->ic", geometry.A_N, X)
    tau = np.einsum("ija,a->ij", geometry.tau, X)
    D_s = np.einsum("iaw,a->iw", geometry.D_s, X) if geometry.D_s is not None else None
    return A, tau, D_s


def screen_split(geometry: InducedGeometry, X, Y):
    """(∇*_X PY, h*(X, PY), A*_ξᵢ X, ∇*t_X ξᵢ) for constant-coefficient X, Y."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    nabla_star = np.einsum("acb,a,b->c", geometry.nabla_star, X, Y)
    h_star = np.einsum("iab,a,b->i", geometry.h_star, X, Y)
    A_star = np.einsum("ica,a->ic", geometry.A_xi_star, X)
    nabla_t = np.einsum("ija,a->ij", geometry.nabla_star_t, X)
    return nabla_star, h_star, A_star, nabla_t


def _value_frame(setup: GeometrySetup, u):
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


def rigged_values(setup: GeometrySetup, u) -> Dict[str, np.ndarray]:
    """Plain values of g, ω and g̃ at u; the finite-difference oracle differentiates these."""
    frame, rig = _value_frame(setup, u)
    omega = rig.omega.value
    g = frame.metric.value
    return {"g": g, "omega": omega, "g_tilde": g + setup.sign * np.einsum("ia,ib->ab", omega, omega)}


def connection_values(setup: GeometrySetup, u) -> np.ndarray:
    """Coefficients Γ[c, a, b] of ∇ at u without derivative bookkeeping."""
    frame, _ = _value_frame(setup, u)
    dual = FrameDual(frame)
    n = setup.plan.n
    J = frame.jacobian
    gamma_bar = scalar.constant(christoffel(setup.ambient, frame.phi.value), n, 0)
    D_tan = _along(J.T, gamma_bar, J.truncate(0), n)
    return np.transpose(scalar.value_of(dual.tangent_coords(dual.split(D_tan))), (2, 0, 1))
