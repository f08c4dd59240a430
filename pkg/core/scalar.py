"""
Truncated Taylor arithmetic for exact derivatives.

A DScalar holds an array of values together with its first, second and
(optionally) third derivatives with respect to a fixed set of active
directions.  The derivative tensors carry the derivative axes *after* the value
axes, so a DScalar of shape (4, 4) over 3 directions has ``grad.shape ==
(4, 4, 3)`` and ``hess.shape == (4, 4, 3, 3)``.  Arithmetic follows the Leibniz
and chain rules order by order; nothing is nested, so there is no perturbation
confusion and every derivative tensor is symmetric by construction.

The elementary functions of this module (sin, cos, exp, ...) accept plain
floats, numpy arrays and DScalars alike, which is what lets the geometry code
run unchanged on values, on jets and on oracle evaluations.
"""

from typing import Iterable, List, Optional, Sequence

import numpy as np

MAX_ORDER = 3

# einsum letters reserved for derivative axes; user subscripts must be lowercase
_DERIV_AXES = "UVWXYZ"


def _expand(arr: np.ndarray, k: int) -> np.ndarray:
    """Append k singleton axes."""
    return arr.reshape(arr.shape + (1,) * k)


def _lift_lead(part: np.ndarray, k: int, nlead: int) -> np.ndarray:
    lead = part.ndim - k
    if lead < nlead:
        part = part.reshape((1,) * (nlead - lead) + part.shape)
    return part


def _outer_mul(x: np.ndarray, kx: int, y: np.ndarray, ky: int) -> np.ndarray:
    """Elementwise product over the value axes, outer product over the derivative axes."""
    nlead = max(x.ndim - kx, y.ndim - ky)
    x = _lift_lead(x, kx, nlead)
    y = _lift_lead(y, ky, nlead)
    x = x.reshape(x.shape + (1,) * ky)
    y = y.reshape(y.shape[:nlead] + (1,) * kx + y.shape[nlead:])
    return x * y


def _assemble(prod, a: Sequence[np.ndarray], b: Sequence[np.ndarray], k: int) -> np.ndarray:
    """k-th derivative tensor of a bilinear product, symmetrised over the derivative axes."""
    if k == 0:
        return prod(a[0], 0, b[0], 0)
    if k == 1:
        return prod(a[1], 1, b[0], 0) + prod(a[0], 0, b[1], 1)
    if k == 2:
        p11 = prod(a[1], 1, b[1], 1)
        return prod(a[2], 2, b[0], 0) + prod(a[0], 0, b[2], 2) + p11 + np.swapaxes(p11, -1, -2)
    p21 = prod(a[2], 2, b[1], 1)
    p12 = prod(a[1], 1, b[2], 2)
    return (
        prod(a[3], 3, b[0], 0)
        + prod(a[0], 0, b[3], 3)
        + p21 + np.swapaxes(p21, -1, -2) + np.moveaxis(p21, -1, -3)
        + p12 + np.swapaxes(p12, -3, -2) + np.moveaxis(p12, -3, -1)
    )


class DScalar:
    """
    An array of values carrying exact derivatives up to order three.

    Args:
        value: value array (any shape)
        grad: first derivatives, shape ``value.shape + (nvars,)``
        hess: second derivatives, shape ``value.shape + (nvars, nvars)``
        third: third derivatives, shape ``value.shape + (nvars,) * 3``
        nvars: number of active directions, required only when ``grad`` is omitted
    """

    __slots__ = ("_parts", "_nvars")

    # make numpy hand mixed operations back to us instead of building object arrays
    __array_ufunc__ = None

    def __init__(self, value, grad=None, hess=None, third=None, nvars: Optional[int] = None):
        parts = [np.asarray(value, dtype=float)]
        for part in (grad, hess, third):
            if part is None:
                break
            parts.append(np.asarray(part, dtype=float))
        if len(parts) > 1:
            nvars = parts[1].shape[-1]
        if nvars is None:
            raise ValueError("nvars is required for a value-only DScalar")
        self._parts = tuple(parts)
        self._nvars = int(nvars)

    @classmethod
    def _from_parts(cls, parts: Sequence[np.ndarray], nvars: int) -> "DScalar":
        obj = cls.__new__(cls)
        obj._parts = tuple(parts)
        obj._nvars = nvars
        return obj

    # -- accessors -----------------------------------------------------------------

    @property
    def parts(self):
        return self._parts

    @property
    def value(self) -> np.ndarray:
        return self._parts[0]

    @property
    def grad(self) -> Optional[np.ndarray]:
        return self._parts[1] if self.order >= 1 else None

    @property
    def hess(self) -> Optional[np.ndarray]:
        return self._parts[2] if self.order >= 2 else None

    @property
    def third(self) -> Optional[np.ndarray]:
        return self._parts[3] if self.order >= 3 else None

    @property
    def order(self) -> int:
        return len(self._parts) - 1

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def shape(self):
        return self._parts[0].shape

    @property
    def ndim(self) -> int:
        return self._parts[0].ndim

    def __len__(self) -> int:
        return self.shape[0]

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def __repr__(self) -> str:
        return f"DScalar(shape={self.shape}, nvars={self.nvars}, order={self.order}, value={self.value!r})"

    # -- structural operations ---------------------------------------------------------

    def truncate(self, order: int) -> "DScalar":
        if order >= self.order:
            return self
        return DScalar._from_parts(self._parts[: order + 1], self._nvars)

    def partial(self, direction: int) -> "DScalar":
        """Derivative along one active direction, one order lower."""
        if self.order < 1:
            raise ValueError("cannot differentiate a value-only DScalar")
        # derivative tensors are symmetric, so the last axis serves for any slot
        return DScalar._from_parts([p[..., direction] for p in self._parts[1:]], self._nvars)

    def __getitem__(self, key) -> "DScalar":
        if key is Ellipsis or (isinstance(key, tuple) and any(k is Ellipsis or k is None for k in key)):
            raise IndexError("DScalar indexing only supports ints, slices and index arrays")
        return DScalar._from_parts([p[key] for p in self._parts], self._nvars)

    @property
    def T(self) -> "DScalar":
        if self.ndim != 2:
            raise ValueError("transpose is defined for 2-D DScalars only")
        return DScalar._from_parts([np.swapaxes(p, 0, 1) for p in self._parts], self._nvars)

    def swapaxes(self, a: int, b: int) -> "DScalar":
        if a < 0 or b < 0:
            raise ValueError("axes must be non-negative value axes")
        return DScalar._from_parts([np.swapaxes(p, a, b) for p in self._parts], self._nvars)

    def transpose(self, *axes: int) -> "DScalar":
        if sorted(axes) != list(range(self.ndim)):
            raise ValueError(f"transpose needs a permutation of the {self.ndim} value axes")
        parts = [p.transpose(tuple(axes) + tuple(range(self.ndim, p.ndim))) for p in self._parts]
        return DScalar._from_parts(parts, self._nvars)

    def sum(self, axis: Optional[int] = None) -> "DScalar":
        if axis is None:
            axes = tuple(range(self.ndim))
        elif axis < 0:
            raise ValueError("axis must be a non-negative value axis")
        else:
            axes = (axis,)
        return DScalar._from_parts([p.sum(axis=axes) for p in self._parts], self._nvars)

    # -- arithmetic ------------------------------------------------------------------

    def _binary_parts(self, other: "DScalar"):
        if other.nvars != self.nvars:
            raise ValueError(f"DScalar direction count mismatch: {self.nvars} vs {other.nvars}")
        order = min(self.order, other.order)
        return self._parts[: order + 1], other._parts[: order + 1]

    def __add__(self, other):
        if isinstance(other, DScalar):
            a, b = self._binary_parts(other)
            nlead = max(self.ndim, other.ndim)
            parts = [_lift_lead(x, k, nlead) + _lift_lead(y, k, nlead) for k, (x, y) in enumerate(zip(a, b))]
            return DScalar._from_parts(parts, self._nvars)
        c = np.asarray(other, dtype=float)
        value = self.value + c
        parts = [value]
        for k, p in enumerate(self._parts[1:], start=1):
            p = _lift_lead(p, k, value.ndim)
            parts.append(np.broadcast_to(p, value.shape + p.shape[value.ndim:]))
        return DScalar._from_parts(parts, self._nvars)

    __radd__ = __add__

    def __neg__(self):
        return DScalar._from_parts([-p for p in self._parts], self._nvars)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, DScalar):
            a, b = self._binary_parts(other)
            parts = [_assemble(_outer_mul, a, b, k) for k in range(len(a))]
            return DScalar._from_parts(parts, self._nvars)
        c = np.asarray(other, dtype=float)
        return DScalar._from_parts([_outer_mul(p, k, c, 0) for k, p in enumerate(self._parts)], self._nvars)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, DScalar):
            return self * reciprocal(other)
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, exponent):
        if isinstance(exponent, DScalar):
            return exp(log(self) * exponent)
        p = float(exponent)
        if p == 2.0:
            return self * self
        v = self.value
        derivs = [np.power(v, p)]
        coef = 1.0
        for j in range(1, self.order + 1):
            coef *= p - (j - 1)
            derivs.append(coef * np.power(v, p - j))
        return _compose(self, derivs)

    def __matmul__(self, other):
        return einsum(_matmul_subscripts(self.ndim, np.ndim(other) if not isinstance(other, DScalar) else other.ndim), self, other)

    def __rmatmul__(self, other):
        return einsum(_matmul_subscripts(np.ndim(other), self.ndim), other, self)


def _matmul_subscripts(nda: int, ndb: int) -> str:
    table = {
        (2, 2): "ij,jk->ik",
        (2, 1): "ij,j->i",
        (1, 2): "j,jk->k",
        (1, 1): "j,j->",
    }
    if (nda, ndb) not in table:
        raise ValueError(f"matmul supports 1-D and 2-D operands, got {nda}-D @ {ndb}-D")
    return table[(nda, ndb)]


def _compose(a: DScalar, derivs: List[np.ndarray]) -> DScalar:
    """Chain rule: derivs[j] is the j-th derivative of the outer function at a.value."""
    parts = [np.asarray(derivs[0], dtype=float)]
    if a.order >= 1:
        a1 = a.grad
        parts.append(_expand(derivs[1], 1) * a1)
    if a.order >= 2:
        a2 = a.hess
        outer11 = a1[..., :, None] * a1[..., None, :]
        parts.append(_expand(derivs[1], 2) * a2 + _expand(derivs[2], 2) * outer11)
    if a.order >= 3:
        a3 = a.third
        p12 = a1[..., :, None, None] * a2[..., None, :, :]
        sym12 = p12 + np.swapaxes(p12, -3, -2) + np.moveaxis(p12, -3, -1)
        outer111 = a1[..., :, None, None] * a1[..., None, :, None] * a1[..., None, None, :]
        parts.append(_expand(derivs[1], 3) * a3 + _expand(derivs[2], 3) * sym12 + _expand(derivs[3], 3) * outer111)
    return DScalar._from_parts(parts, a.nvars)


# -- construction -------------------------------------------------------------------------


def lift(point, active: Optional[Iterable[int]] = None, order: int = 2) -> DScalar:
    """
    Seed a coordinate point as a DScalar vector.

    Args:
        point: coordinates, 1-D
        active: coordinate indices that become active directions (default: all)
        order: highest derivative order carried (0..3)

    Returns:
        DScalar with value = point and grad rows = canonical basis for active
        coordinates, zero rows elsewhere.
    """
    point = np.asarray(point, dtype=float).reshape(-1)
    dim = point.shape[0]
    active = list(range(dim)) if active is None else sorted(set(active))
    if any(i < 0 or i >= dim for i in active):
        raise ValueError(f"active directions {active} are not coordinate indices of a {dim}-point")
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be between 0 and {MAX_ORDER}")
    m = len(active)
    parts = [point.copy()]
    if order >= 1:
        grad = np.zeros((dim, m))
        for j, i in enumerate(active):
            grad[i, j] = 1.0
        parts.append(grad)
    for k in range(2, order + 1):
        parts.append(np.zeros((dim,) + (m,) * k))
    return DScalar._from_parts(parts, m)


def constant(value, nvars: int, order: int) -> DScalar:
    value = np.asarray(value, dtype=float)
    parts = [value] + [np.zeros(value.shape + (nvars,) * k) for k in range(1, order + 1)]
    return DScalar._from_parts(parts, nvars)


def value_of(x) -> np.ndarray:
    return x.value if isinstance(x, DScalar) else np.asarray(x, dtype=float)


def is_dscalar(x) -> bool:
    return isinstance(x, DScalar)


def stack(items: Sequence, axis: int = 0):
    """np.stack for mixtures of DScalars and constants (axis counts value axes only)."""
    jets = [x for x in items if isinstance(x, DScalar)]
    if not jets:
        return np.stack([np.asarray(x, dtype=float) for x in items], axis=axis)
    if axis < 0:
        raise ValueError("stack axis must be non-negative")
    nvars = jets[0].nvars
    order = min(j.order for j in jets)
    shape = np.broadcast_shapes(*(value_of(x).shape for x in items))
    parts = []
    for k in range(order + 1):
        tail = (nvars,) * k
        comps = []
        for x in items:
            if isinstance(x, DScalar):
                if x.nvars != nvars:
                    raise ValueError("cannot stack DScalars over different directions")
                p = _lift_lead(x.parts[k], k, len(shape))
                comps.append(np.broadcast_to(p, shape + tail))
            elif k == 0:
                comps.append(np.broadcast_to(np.asarray(x, dtype=float), shape))
            else:
                comps.append(np.zeros(shape + tail))
        parts.append(np.stack(comps, axis=axis))
    return DScalar._from_parts(parts, nvars)


# -- linear algebra ------------------------------------------------------------------------


def einsum(subscripts: str, a, b):
    """Two-operand einsum that propagates derivatives by the Leibniz rule."""
    inputs, output = subscripts.replace(" ", "").split("->")
    sa, sb = inputs.split(",")
    if not isinstance(a, DScalar) and not isinstance(b, DScalar):
        return np.einsum(subscripts, a, b)
    if not isinstance(b, DScalar):
        parts = [np.einsum(f"{sa}{_DERIV_AXES[:k]},{sb}->{output}{_DERIV_AXES[:k]}", p, b) for k, p in enumerate(a.parts)]
        return DScalar._from_parts(parts, a.nvars)
    if not isinstance(a, DScalar):
        parts = [np.einsum(f"{sa},{sb}{_DERIV_AXES[:k]}->{output}{_DERIV_AXES[:k]}", a, p) for k, p in enumerate(b.parts)]
        return DScalar._from_parts(parts, b.nvars)

    def prod(x, kx, y, ky):
        dx = _DERIV_AXES[:kx]
        dy = _DERIV_AXES[kx:kx + ky]
        return np.einsum(f"{sa}{dx},{sb}{dy}->{output}{dx}{dy}", x, y)

    pa, pb = a._binary_parts(b)
    return DScalar._from_parts([_assemble(prod, pa, pb, k) for k in range(len(pa))], a.nvars)


def inv(a):
    """Inverse of a square matrix; derivatives from A·A⁻¹ = I order by order."""
    if not isinstance(a, DScalar):
        return np.linalg.inv(a)
    x0 = np.linalg.inv(a.value)

    def prod(x, kx, y, ky):
        dx = _DERIV_AXES[:kx]
        dy = _DERIV_AXES[kx:kx + ky]
        return np.einsum(f"ij{dx},jk{dy}->ik{dx}{dy}", x, y)

    parts = [x0]
    for k in range(1, a.order + 1):
        trial = parts + [np.zeros(x0.shape + (a.nvars,) * k)]
        rest = _assemble(prod, a.parts, trial, k)
        d = _DERIV_AXES[:k]
        parts.append(-np.einsum(f"ij,jk{d}->ik{d}", x0, rest))
    return DScalar._from_parts(parts, a.nvars)


# -- elementary functions ---------------------------------------------------------------------


def reciprocal(x):
    if not isinstance(x, DScalar):
        return 1.0 / np.asarray(x, dtype=float)
    v = x.value
    r = 1.0 / v
    return _compose(x, [r, -r ** 2, 2.0 * r ** 3, -6.0 * r ** 4][: x.order + 1])


def sin(x):
    if not isinstance(x, DScalar):
        return np.sin(x)
    s, c = np.sin(x.value), np.cos(x.value)
    return _compose(x, [s, c, -s, -c][: x.order + 1])


def cos(x):
    if not isinstance(x, DScalar):
        return np.cos(x)
    s, c = np.sin(x.value), np.cos(x.value)
    return _compose(x, [c, -s, -c, s][: x.order + 1])


def tan(x):
    if not isinstance(x, DScalar):
        return np.tan(x)
    t = np.tan(x.value)
    sec2 = 1.0 + t * t
    return _compose(x, [t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t)][: x.order + 1])


def exp(x):
    if not isinstance(x, DScalar):
        return np.exp(x)
    e = np.exp(x.value)
    return _compose(x, [e, e, e, e][: x.order + 1])


def log(x):
    if not isinstance(x, DScalar):
        return np.log(x)
    v = x.value
    return _compose(x, [np.log(v), 1.0 / v, -1.0 / v ** 2, 2.0 / v ** 3][: x.order + 1])


def sqrt(x):
    if not isinstance(x, DScalar):
        return np.sqrt(x)
    r = np.sqrt(x.value)
    return _compose(x, [r, 0.5 / r, -0.25 / r ** 3, 0.375 / r ** 5][: x.order + 1])


def sinh(x):
    if not isinstance(x, DScalar):
        return np.sinh(x)
    sh, ch = np.sinh(x.value), np.cosh(x.value)
    return _compose(x, [sh, ch, sh, ch][: x.order + 1])


def cosh(x):
    if not isinstance(x, DScalar):
        return np.cosh(x)
    sh, ch = np.sinh(x.value), np.cosh(x.value)
    return _compose(x, [ch, sh, ch, sh][: x.order + 1])


def tanh(x):
    if not isinstance(x, DScalar):
        return np.tanh(x)
    t = np.tanh(x.value)
    s = 1.0 - t * t
    return _compose(x, [t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)][: x.order + 1])


ELEMENTARY = {
    "sin": sin,
    "cos": cos,
    "tan": tan,
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
}
