"""
Null transversal frames (riggings), their 1-forms and the rigged metric.
"""

import itertools
import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from core import scalar, tensors
from core.ambient import AmbientManifold, christoffel
from core.scalar import DScalar
from core.submanifold import NullFrame
from utils import config
from utils.errors import (
    ConfigurationError,
    ContradictionError,
    RechartError,
    TransversalConstructionError,
    UnsupportedError,
)

logger = logging.getLogger("NullRig")


@dataclass
class Rigging:
    """
    Transversal fields Nᵢ and their 1-forms ωᵢ(∂a) = ḡ(∂aφ, Nᵢ).

    closed_flag is one of "closed", "not-closed" or "unknown".
    """

    N: DScalar
    omega: DScalar
    source: str = "auto"
    closed_flag: str = "unknown"


@dataclass
class RiggedMetric:
    base: np.ndarray
    matrix: DScalar
    sign_convention: int
    index: int
    det: float


# -- seeds ------------------------------------------------------------------------------


def choose_seeds(xi: np.ndarray, gbar: np.ndarray) -> Tuple[Tuple[float, ...], ...]:
    """First r-subset of ambient coordinate directions with invertible G_ij = ḡ(Vᵢ, ξⱼ)."""
    r, dim = xi.shape
    basis = np.eye(dim)
    pairing = basis @ gbar @ xi.T
    scale = float(np.max(np.abs(pairing))) or 1.0
    for subset in itertools.combinations(range(dim), r):
        G = pairing[list(subset)]
        if abs(np.linalg.det(G)) > config.PIVOT_TOL * scale ** r:
            return tuple(tuple(float(v) for v in basis[i]) for i in subset)
    raise TransversalConstructionError("No coordinate seed subset pairs invertibly with the radical")


# -- construction -------------------------------------------------------------------------


def construct_transversal(frame: NullFrame, seeds) -> DScalar:
    """
    Closed-form null transversal frame.

    Wᵢ = Σⱼ (G⁻¹)ᵢⱼ Vⱼ, stripped of its screen and screen-transversal parts, then
    Nᵢ = Wᵢ′ − ½ Σⱼ ḡ(Wᵢ′, Wⱼ′) ξⱼ.  The result satisfies ḡ(Nᵢ, ξⱼ) = δᵢⱼ,
    ḡ(Nᵢ, Nⱼ) = 0 and is orthogonal to the screen and the screen transversal.
    """
    gbar = frame.ambient_metric
    V = np.asarray(seeds, dtype=float)
    xi_low = scalar.einsum("ef,if->ie", gbar, frame.xi)
    G = scalar.einsum("ie,je->ij", V, xi_low)
    if abs(np.linalg.det(G.value)) < config.PIVOT_TOL * (float(np.max(np.abs(G.value))) or 1.0) ** frame.r:
        raise RechartError("Seed pairing with the radical is singular at this point")
    W = scalar.einsum("ij,je->ie", scalar.inv(G), V)

    if frame.n > frame.r:
        screen_low = scalar.einsum("ef,af->ae", gbar, frame.screen)
        coef = scalar.einsum("ie,ae->ia", W, screen_low) * frame.screen_signs
        W = W - scalar.einsum("ia,ae->ie", coef, frame.screen)
    if frame.k > frame.r:
        st = frame.screen_transversal
        st_low = scalar.einsum("ef,af->ae", gbar, st)
        gram = scalar.einsum("ae,be->ab", st_low, st)
        coef = scalar.einsum("ie,ae->ia", W, st_low)
        coef = scalar.einsum("ia,ab->ib", coef, scalar.inv(gram))
        W = W - scalar.einsum("ib,be->ie", coef, st)

    WW = scalar.einsum("ie,je->ij", W, scalar.einsum("ef,jf->je", gbar, W))
    return W - 0.5 * scalar.einsum("ij,je->ie", WW, frame.xi)


def omega_forms(N: DScalar, frame: NullFrame) -> DScalar:
    """omega[i, a] = ωᵢ(∂a) = ḡ(∂aφ, Nᵢ)."""
    return scalar.einsum("ea,ie->ia", frame.jacobian, scalar.einsum("ef,if->ie", frame.ambient_metric, N))


def build_rigging(frame: NullFrame, seeds=None, rigging_fn: Optional[Callable] = None) -> Tuple[NullFrame, Rigging]:
    """Fill the frame's transversal slot from the override or the closed-form construction."""
    if rigging_fn is not None:
        N = rigging_fn(scalar.lift(frame.base, order=frame.metric.order))
        if not isinstance(N, DScalar):
            N = scalar.constant(N, frame.n, frame.metric.order)
        source = "catalog"
    else:
        if not seeds:
            seeds = choose_seeds(frame.xi.value, frame.ambient_metric.value)
        N = construct_transversal(frame, seeds)
        source = "auto"
    omega = omega_forms(N, frame)
    rig = Rigging(N=N, omega=omega, source=source)
    closed, _ = is_closed(rig)
    rig.closed_flag = "closed" if all(closed) else "not-closed"
    return replace(frame, transversal=N), rig


def projection_P(frame: NullFrame, rig: Rigging, X):
    """PX = X − Σᵢ ωᵢ(X) ξᵢ for tangent-coordinate vectors X (last axis)."""
    X = X if isinstance(X, DScalar) else np.asarray(X, dtype=float)
    omega_x = omega_of(rig, X)
    return X - _combine(omega_x, frame.xi_coords)


def omega_of(rig: Rigging, X):
    """ωᵢ(X) for tangent-coordinate vectors with the component on the last axis."""
    batch = "pqs"[: scalar.value_of(X).ndim - 1]
    return scalar.einsum(f"{batch}a,ia->{batch}i", X, rig.omega)


def _combine(coef, vectors):
    batch = "pqs"[: scalar.value_of(coef).ndim - 1]
    return scalar.einsum(f"{batch}i,ia->{batch}a", coef, vectors)


def projection_matrix(frame: NullFrame, rig: Rigging):
    """Matrix of P acting on tangent coordinates: P[a, b] = δ_ab − Σᵢ ξᵢ^a ωᵢ(∂b)."""
    eye = np.eye(frame.n)
    return eye - scalar.einsum("ia,ib->ab", frame.xi_coords, rig.omega)


def rigged_metric(frame: NullFrame, rig: Rigging, sign: int = 1) -> RiggedMetric:
    """g̃ = g + ε Σᵢ ωᵢ ⊗ ωᵢ in tangent coordinates."""
    if sign not in (1, -1):
        raise ConfigurationError(f"Sign convention must be +1 or -1, got {sign}")
    matrix = frame.metric + float(sign) * scalar.einsum("ia,ib->ab", rig.omega, rig.omega)
    value = matrix.value
    det = float(np.linalg.det(value))
    if tensors.numerical_rank(value) < frame.n or abs(det) <= config.NONDEGENERACY_FLOOR:
        logger.error(f"Rigged metric is degenerate at {frame.base.tolist()} (det = {det:.3e})")
        raise ContradictionError(f"Rigged metric is degenerate at {frame.base.tolist()} (det = {det:.3e})")
    negative, _, _ = tensors.signature(value)
    return RiggedMetric(base=frame.base, matrix=matrix, sign_convention=sign, index=negative, det=det)


# -- predicates ----------------------------------------------------------------------------------


def exterior_derivative(rig: Rigging) -> np.ndarray:
    """d[i, a, b] = ∂a ωᵢ(∂b) − ∂b ωᵢ(∂a)."""
    grad = rig.omega.grad
    return np.swapaxes(grad, -1, -2) - grad


def is_closed(rig: Rigging, tol: float = config.FIRST_ORDER_TOL) -> Tuple[List[bool], float]:
    """Per-index closedness of ωᵢ and the largest |dωᵢ| component."""
    d = exterior_derivative(rig)
    per_index = [float(np.max(np.abs(d[i]))) if d[i].size else 0.0 for i in range(d.shape[0])]
    return [v < tol for v in per_index], max(per_index, default=0.0)


@dataclass
class ConformalFit:
    conformal: List[bool]
    lam: List[float]
    residual: List[float]


def is_conformal_rigging(
    m: AmbientManifold, extension: Optional[Callable], x, tol: float = config.FIRST_ORDER_TOL
) -> ConformalFit:
    """
    Least-squares test of ḡ(∇̄_X N, Y) + ḡ(∇̄_Y N, X) = λ ḡ(X, Y) over the ambient coordinate frame.

    Args:
        m: ambient manifold
        extension: ambient point -> (r, N) extension of the rigging; None raises UnsupportedError
        x: ambient base point on the submanifold
    """
    if extension is None:
        raise UnsupportedError("No ambient extension of the rigging is available")
    x = np.asarray(x, dtype=float)
    gbar = m.metric(x)
    gamma = christoffel(m, x)
    fields = extension(scalar.lift(x, order=1))
    if not isinstance(fields, DScalar):
        fields = scalar.constant(fields, m.dim, 1)
    cov = fields.grad + np.einsum("cab,ib->ica", gamma, fields.value)
    lowered = np.einsum("cb,ica->iab", gbar, cov)
    S = lowered + np.swapaxes(lowered, -1, -2)
    norm = float(np.sum(gbar * gbar))
    out = ConformalFit([], [], [])
    for i in range(S.shape[0]):
        lam = float(np.sum(S[i] * gbar)) / norm
        residual = float(np.linalg.norm(S[i] - lam * gbar))
        out.conformal.append(residual < tol)
        out.lam.append(lam)
        out.residual.append(residual)
    return out


# -- frame duality ---------------------------------------------------------------------------------


@dataclass
class Split:
    """Coefficients of an ambient vector along ξ, e, N and W."""

    xi: object
    screen: object
    ltr: object
    st: object


class FrameDual:
    """
    Dual pairing of the adapted frame {ξᵢ, e_a, Nᵢ, W_α}.

    Coefficients of V: along ξᵢ is ḡ(V, Nᵢ), along e_a is ε_a ḡ(V, e_a), along
    Nᵢ is ḡ(V, ξᵢ), along W_α is (Gram_W⁻¹ ḡ(W, V))_α.
    """

    def __init__(self, frame: NullFrame):
        if frame.transversal is None:
            raise ValueError("frame has no transversal fields yet")
        gbar = frame.ambient_metric
        self.frame = frame
        self.xi_low = scalar.einsum("ef,if->ie", gbar, frame.xi)
        self.n_low = scalar.einsum("ef,if->ie", gbar, frame.transversal)
        self.screen_low = scalar.einsum("ef,af->ae", gbar, frame.screen) * frame.screen_signs[:, None]
        if frame.k > frame.r:
            st_low = scalar.einsum("ef,af->ae", gbar, frame.screen_transversal)
            gram = scalar.einsum("ae,be->ab", st_low, frame.screen_transversal)
            self.st_dual = scalar.einsum("ab,be->ae", scalar.inv(gram), st_low)
        else:
            self.st_dual = None

    @staticmethod
    def _pair(V, covectors):
        batch = "pqs"[: scalar.value_of(V).ndim - 1]
        return scalar.einsum(f"{batch}e,ie->{batch}i", V, covectors)

    def split(self, V) -> Split:
        return Split(
            xi=self._pair(V, self.n_low),
            screen=self._pair(V, self.screen_low),
            ltr=self._pair(V, self.xi_low),
            st=self._pair(V, self.st_dual) if self.st_dual is not None else None,
        )

    def tangent_coords(self, parts: Split):
        """Tangent part of a split as chart components."""
        out = _combine(parts.xi, self.frame.xi_coords)
        if self.frame.n > self.frame.r:
            out = out + _combine(parts.screen, self.frame.screen_coords)
        return out

    def reconstruct(self, parts: Split):
        f = self.frame
        out = _combine(parts.xi, f.xi) + _combine(parts.ltr, f.transversal)
        if f.n > f.r:
            out = out + _combine(parts.screen, f.screen)
        if parts.st is not None:
            out = out + _combine(parts.st, f.screen_transversal)
        return out
