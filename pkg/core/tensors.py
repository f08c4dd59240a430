"""
Coordinate tensor routines shared by the ambient, induced and rigged geometries.

Index conventions (used everywhere in the package):
    Gamma[c, a, b]       = Γ^c_{ab},  ∇_{∂a} ∂b = Γ^c_{ab} ∂c
    R[d, c, a, b]        = R^d_{cab}, R(∂a, ∂b) ∂c = R^d_{cab} ∂d
    lowered[a, b, c, d]  = R(∂a, ∂b, ∂c, ∂d) = g(R(∂a, ∂b) ∂c, ∂d)
with R(X, Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_[X,Y] Z.
"""

from typing import Tuple

import numpy as np

from core import scalar
from core.scalar import DScalar
from utils import config
from utils.errors import DegeneracyError


def metric_derivatives(metric: DScalar) -> DScalar:
    """dg[a, b, d] = ∂_a g_bd, one order below the metric jet."""
    return scalar.stack([metric.partial(a) for a in range(metric.nvars)])


def levi_civita(metric: DScalar) -> DScalar:
    """
    Christoffel symbols of a metric jet whose active directions are the chart coordinates.

    Args:
        metric: DScalar of shape (m, m) over m directions, order >= 1

    Returns:
        DScalar Gamma[c, a, b] of order metric.order - 1
    """
    if metric.order < 1:
        raise ValueError("Christoffel symbols need at least first derivatives of the metric")
    if metric.nvars != metric.shape[0]:
        raise ValueError("metric jet must be differentiated along its own chart coordinates")
    check_nondegenerate(metric.value)
    dg = metric_derivatives(metric)
    # lower[d, a, b] = ½(∂_a g_bd + ∂_b g_ad − ∂_d g_ab)
    lower = 0.5 * (dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg)
    ginv = scalar.inv(metric.truncate(metric.order - 1))
    return scalar.einsum("cd,dab->cab", ginv, lower)


def curvature_from_arrays(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """R[d, c, a, b] from Γ[d, b, c] and dgamma[a, d, b, c] = ∂_a Γ^d_{bc}."""
    return (
        np.transpose(dgamma, (1, 3, 0, 2))
        - np.transpose(dgamma, (1, 3, 2, 0))
        + np.einsum("dae,ebc->dcab", gamma, gamma)
        - np.einsum("dbe,eac->dcab", gamma, gamma)
    )


def curvature_of_connection(gamma: DScalar) -> np.ndarray:
    """
    Curvature of a torsion-free or general connection from its coefficient jet.

    Args:
        gamma: DScalar Γ[d, b, c] over the chart coordinates, order >= 1

    Returns:
        R[d, c, a, b] as a float array
    """
    if gamma.order < 1:
        raise ValueError("curvature needs first derivatives of the connection coefficients")
    dgamma = np.moveaxis(gamma.grad, -1, 0)
    return curvature_from_arrays(gamma.value, dgamma)


def lower_curvature(riemann: np.ndarray, metric: np.ndarray) -> np.ndarray:
    return np.einsum("dcab,dw->abcw", riemann, metric)


def first_bianchi(riemann: np.ndarray) -> np.ndarray:
    return riemann + np.transpose(riemann, (0, 3, 1, 2)) + np.transpose(riemann, (0, 2, 3, 1))


def curvature_symmetry_residuals(lowered: np.ndarray) -> dict:
    """Residuals of the algebraic symmetries of a lowered Levi-Civita curvature tensor."""
    return {
        "antisymmetry-first-pair": float(np.max(np.abs(lowered + lowered.transpose(1, 0, 2, 3)))),
        "antisymmetry-second-pair": float(np.max(np.abs(lowered + lowered.transpose(0, 1, 3, 2)))),
        "pair-symmetry": float(np.max(np.abs(lowered - lowered.transpose(2, 3, 0, 1)))),
        "first-bianchi": float(np.max(np.abs(lowered + lowered.transpose(1, 2, 0, 3) + lowered.transpose(2, 0, 1, 3)))),
    }


def signature(matrix: np.ndarray, rel_tol: float = config.SIGNATURE_TOL) -> Tuple[int, int, int]:
    """(negative, zero, positive) eigenvalue counts with a tolerance relative to the spectral radius."""
    matrix = np.asarray(matrix, dtype=float)
    eigenvalues = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    radius = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    cut = rel_tol * radius
    negative = int(np.sum(eigenvalues < -cut))
    positive = int(np.sum(eigenvalues > cut))
    return negative, eigenvalues.size - negative - positive, positive


def numerical_rank(matrix: np.ndarray, rel_tol: float = config.RANK_TOL) -> int:
    singular = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.sum(singular > rel_tol * singular[0]))


def check_nondegenerate(matrix: np.ndarray, rel_tol: float = config.RANK_TOL) -> None:
    matrix = np.asarray(matrix, dtype=float)
    if numerical_rank(matrix, rel_tol) < matrix.shape[0]:
        raise DegeneracyError(f"Metric is singular (det = {np.linalg.det(matrix):.3e})")


def inner(metric, x, y):
    """g(x, y) for component vectors; any operand may carry derivatives."""
    return scalar.einsum("a,a->", scalar.einsum("ab,b->a", metric, y), x)
