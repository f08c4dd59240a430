"""
Central finite differences with Richardson extrapolation.

This is the independent oracle the jet arithmetic is checked against.  It only
ever sees plain float arrays: callers hand it a function of a coordinate point.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from utils.errors import ConfigurationError, EvaluationError

logger = logging.getLogger("NullRig")

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FinDiffConfig:
    """
    Step control for the oracle.

    Args:
        step: first-derivative step on unit-scaled coordinates
        richardson_levels: number of step halvings folded into the estimate
        second_step: step for second differences (larger, rounding grows as 1/h²)
    """

    step: float = 1e-5
    richardson_levels: int = 2
    second_step: float = 1e-3

    def __post_init__(self):
        for name in ("step", "second_step"):
            value = getattr(self, name)
            if not 0 < value < 1e-2:
                raise ConfigurationError(f"{name} must lie in (0, 1e-2), got {value}")
        if self.richardson_levels < 1:
            raise ConfigurationError("richardson_levels must be at least 1")


DEFAULT_FD = FinDiffConfig()


def _evaluate(f: ArrayFn, x: np.ndarray) -> np.ndarray:
    value = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"Non-finite function value at offset point {x.tolist()}")
    return value


def _richardson(estimates, order: int = 2) -> np.ndarray:
    """Fold estimates taken at h, h/2, h/4, ... whose error expands in even powers of h."""
    table = list(estimates)
    factor = 2.0 ** order
    while len(table) > 1:
        table = [(factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(table[:-1], table[1:])]
        factor *= 4.0
    return table[0]


def fd_derivative(f: ArrayFn, point, direction: int, config: FinDiffConfig = DEFAULT_FD) -> np.ndarray:
    """
    Derivative of f along one coordinate direction.

    Args:
        f: function of a coordinate point returning a float or an array
        point: coordinate point
        direction: coordinate index to differentiate along
        config: step control

    Returns:
        Array of the same shape as f(point)
    """
    x = np.asarray(point, dtype=float)
    unit = np.zeros_like(x)
    unit[direction] = 1.0
    estimates = []
    h = config.step
    for _ in range(config.richardson_levels + 1):
        estimates.append((_evaluate(f, x + h * unit) - _evaluate(f, x - h * unit)) / (2.0 * h))
        h /= 2.0
    return _richardson(estimates)


def fd_gradient(f: ArrayFn, point, config: FinDiffConfig = DEFAULT_FD) -> np.ndarray:
    """All coordinate derivatives, stacked on a trailing axis like DScalar.grad."""
    x = np.asarray(point, dtype=float)
    return np.stack([fd_derivative(f, x, i, config) for i in range(x.shape[0])], axis=-1)


def fd_second_derivative(f: ArrayFn, point, i: int, j: int, config: FinDiffConfig = DEFAULT_FD) -> np.ndarray:
    x = np.asarray(point, dtype=float)
    ei = np.zeros_like(x)
    ej = np.zeros_like(x)
    ei[i] = 1.0
    ej[j] = 1.0
    estimates = []
    h = config.second_step
    for _ in range(config.richardson_levels + 1):
        if i == j:
            est = (_evaluate(f, x + h * ei) - 2.0 * _evaluate(f, x) + _evaluate(f, x - h * ei)) / (h * h)
        else:
            est = (
                _evaluate(f, x + h * ei + h * ej)
                - _evaluate(f, x + h * ei - h * ej)
                - _evaluate(f, x - h * ei + h * ej)
                + _evaluate(f, x - h * ei - h * ej)
            ) / (4.0 * h * h)
        estimates.append(est)
        h /= 2.0
    return _richardson(estimates)


def fd_hessian(f: ArrayFn, point, config: FinDiffConfig = DEFAULT_FD) -> np.ndarray:
    x = np.asarray(point, dtype=float)
    m = x.shape[0]
    rows = []
    for i in range(m):
        rows.append(np.stack([fd_second_derivative(f, x, i, j, config) for j in range(m)], axis=-1))
    return np.stack(rows, axis=-2)


def max_discrepancy(exact: np.ndarray, estimate: np.ndarray) -> float:
    """Largest absolute difference, scaled by the magnitude of the exact value when it exceeds one."""
    exact = np.asarray(exact, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    scale = max(1.0, float(np.max(np.abs(exact))) if exact.size else 1.0)
    diff = float(np.max(np.abs(exact - estimate))) if exact.size else 0.0
    return diff / scale
