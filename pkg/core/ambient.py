"""
The ambient semi-Riemannian manifold and its Levi-Civita geometry.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from core import scalar, tensors
from core.scalar import DScalar
from utils.errors import ConfigurationError, DegeneracyError, SignatureError

logger = logging.getLogger("NullRig")


def _as_constant_like(matrix: np.ndarray, x):
    if isinstance(x, DScalar):
        return scalar.constant(matrix, x.nvars, x.order)
    return np.array(matrix, dtype=float)


class ConstantMetric:
    """Constant-coefficient metric given by its symmetric matrix."""

    kind = "constant"

    def __init__(self, matrix: Sequence[Sequence[float]]):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigurationError(f"Metric matrix must be square, got shape {matrix.shape}")
        if not np.allclose(matrix, matrix.T, atol=0.0):
            raise ConfigurationError("Metric matrix must be symmetric")
        self.matrix = matrix

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x):
        return _as_constant_like(self.matrix, x)

    def describe(self) -> dict:
        return {"kind": self.kind, "matrix": self.matrix.tolist()}


@dataclass(frozen=True)
class Warp:
    """Warping factor w(x) = fn(scale · x[coordinate]); block metrics are scaled by w²."""

    function: str = "one"
    coordinate: int = 0
    scale: float = 1.0

    def __post_init__(self):
        if self.function not in ("one", "id") and self.function not in scalar.ELEMENTARY:
            raise ConfigurationError(f"Unknown warp function '{self.function}'")

    def __call__(self, x):
        if self.function == "one":
            return 1.0
        arg = x[self.coordinate] * self.scale
        if self.function == "id":
            return arg
        return scalar.ELEMENTARY[self.function](arg)

    def spec(self) -> str:
        if self.function == "one":
            return "one"
        return f"{self.function}:{self.coordinate}:{self.scale!r}"

    @classmethod
    def parse(cls, text: str) -> "Warp":
        text = text.strip()
        if text in ("", "one", "1"):
            return cls()
        pieces = text.split(":")
        try:
            coordinate = int(pieces[1]) if len(pieces) > 1 else 0
            scale = float(pieces[2]) if len(pieces) > 2 else 1.0
        except ValueError as e:
            raise ConfigurationError(f"Malformed warp '{text}': {e}")
        return cls(pieces[0], coordinate, scale)


class WarpedProductMetric:
    """
    Block-diagonal metric whose constant blocks are scaled by squared warping factors.

    Args:
        blocks: constant symmetric block matrices, in coordinate order
        warps: one Warp per block; a warp may only read coordinates of earlier blocks
    """

    kind = "warped"

    def __init__(self, blocks: Sequence[Sequence[Sequence[float]]], warps: Optional[Sequence[Warp]] = None):
        self.blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
        self.warps = list(warps) if warps is not None else [Warp() for _ in self.blocks]
        if len(self.warps) != len(self.blocks):
            raise ConfigurationError("Each metric block needs exactly one warp")
        self.offsets = []
        start = 0
        for block, warp in zip(self.blocks, self.warps):
            if block.shape[0] != block.shape[1] or not np.allclose(block, block.T, atol=0.0):
                raise ConfigurationError("Metric blocks must be square and symmetric")
            if warp.function != "one" and warp.coordinate >= start:
                raise ConfigurationError(
                    f"Warp of the block starting at coordinate {start} reads coordinate {warp.coordinate}, "
                    "which is not in an earlier block"
                )
            self.offsets.append(start)
            start += block.shape[0]
        self._dim = start

    @property
    def dim(self) -> int:
        return self._dim

    def _embedded(self, index: int) -> np.ndarray:
        full = np.zeros((self._dim, self._dim))
        lo = self.offsets[index]
        hi = lo + self.blocks[index].shape[0]
        full[lo:hi, lo:hi] = self.blocks[index]
        return full

    def __call__(self, x):
        total = _as_constant_like(np.zeros((self._dim, self._dim)), x)
        for i, warp in enumerate(self.warps):
            w = warp(x)
            total = total + self._embedded(i) * (w * w)
        return total

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "blocks": [b.tolist() for b in self.blocks],
            "warps": [w.spec() for w in self.warps],
        }


def always(_point) -> bool:
    return True


@dataclass
class AmbientManifold:
    """
    The ambient manifold (M̄, ḡ) in a single coordinate chart.

    Args:
        dim: total dimension n + k
        index: number of negative eigenvalues of the metric
        metric_fn: coordinate point -> symmetric matrix; must accept DScalar points
        chart_domain: predicate on coordinate points
        name: label used in reports
    """

    dim: int
    index: int
    metric_fn: Callable
    chart_domain: Callable[[np.ndarray], bool] = always
    name: str = "ambient"

    def __post_init__(self):
        if self.dim < 3:
            raise ConfigurationError(f"Ambient dimension must be at least 3, got {self.dim}")
        if not 1 <= self.index <= self.dim - 1:
            raise ConfigurationError(f"Ambient index must lie in 1..{self.dim - 1}, got {self.index}")

    def metric(self, x) -> np.ndarray:
        return np.asarray(scalar.value_of(self.metric_fn(np.asarray(x, dtype=float))))

    def metric_jet(self, x, order: int = 2) -> DScalar:
        """Metric as a jet over the ambient coordinates."""
        return self.metric_fn(scalar.lift(x, order=order))

    def validate_point(self, x) -> np.ndarray:
        """Checks domain, nondegeneracy and the declared index; returns the metric at x."""
        x = np.asarray(x, dtype=float)
        if not self.chart_domain(x):
            raise ConfigurationError(f"Point {x.tolist()} lies outside the chart domain of {self.name}")
        g = self.metric(x)
        tensors.check_nondegenerate(g)
        negative, zero, positive = tensors.signature(g)
        if negative != self.index or zero != 0:
            raise SignatureError(
                f"Metric of {self.name} at {x.tolist()} has signature ({negative}, {zero}, {positive}), "
                f"declared index {self.index}"
            )
        return g


def christoffel_jet(m: AmbientManifold, x, order: int = 1) -> DScalar:
    """Γ̄[c, a, b] as a jet over the ambient coordinates."""
    return tensors.levi_civita(m.metric_jet(x, order + 1))


def christoffel(m: AmbientManifold, x) -> np.ndarray:
    """Christoffel symbols Γ̄^c_{ab} of the ambient metric at x."""
    try:
        return tensors.levi_civita(m.metric_jet(x, 1)).value
    except DegeneracyError:
        logger.error(f"Singular ambient metric of {m.name} at {np.asarray(x).tolist()}")
        raise


def ambient_curvature(m: AmbientManifold, x) -> np.ndarray:
    """R̄[d, c, a, b] at x."""
    return tensors.curvature_of_connection(christoffel_jet(m, x, 1))


def ambient_cov_deriv(m: AmbientManifold, field_fn: Callable, x, direction) -> np.ndarray:
    """
    (∇̄_X V)^c = X(V^c) + Γ̄^c_{ab} X^a V^b for a vector field V given as a function of the ambient point.

    Args:
        m: ambient manifold
        field_fn: ambient point -> components; must accept DScalar points
        x: base point
        direction: components of X at x
    """
    direction = np.asarray(direction, dtype=float)
    v = field_fn(scalar.lift(x, order=1))
    if not isinstance(v, DScalar):
        v = scalar.constant(v, len(direction), 1)
    derivative = v.grad @ direction
    return derivative + np.einsum("cab,a,b->c", christoffel(m, x), direction, v.value)


def pull_back_jet(field: DScalar, jacobian: np.ndarray) -> DScalar:
    """First-order chain rule: a jet over ambient coordinates re-expressed over chart directions."""
    grad = np.einsum("...e,ea->...a", field.grad, jacobian)
    return DScalar(field.value, grad)
