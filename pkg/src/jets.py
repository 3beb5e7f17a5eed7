"""
Truncated Taylor arithmetic ("jets") up to order 3.

A jet of order k in ``dim`` variables carries a value and its exact partial
derivatives through order k: ``value``, ``grad[i]``, ``hess[i][j]`` and
``third[i][j][l]``. Products follow the Leibniz rule and elementary functions
the chain rule, so composite expressions are differentiated exactly.

``Jet`` is the scalar type used by the expression evaluator. ``JetArray`` holds
a whole tensor of jets (metric matrices, connection coefficients) with the
derivative axes trailing the value axes, and supports einsum contractions and
matrix inversion at jet level.
"""
import functools
import logging
import math
import numbers
import string
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from src.errors import (
    ArgumentError,
    JetEvaluationError,
    OrderBudgetError,
    SingularMetricError,
)

logger = logging.getLogger('norden-lab.jets')

MAX_ORDER = 3
Parts = Tuple[np.ndarray, ...]


def _check_dim_order(dim: int, order: int) -> None:
    if not isinstance(dim, numbers.Integral) or dim < 2:
        raise ArgumentError(f"jet dimension must be an integer >= 2, got {dim!r}")
    if not isinstance(order, numbers.Integral) or not 0 <= order <= MAX_ORDER:
        raise ArgumentError(f"jet order must be in 0..{MAX_ORDER}, got {order!r}")


@functools.lru_cache(maxsize=None)
def _canonical_index(dim: int, rank: int) -> Tuple[np.ndarray, ...]:
    grid = np.indices((dim,) * rank)
    return tuple(np.sort(grid, axis=0))


def _canonical(part: np.ndarray, rank: int) -> np.ndarray:
    """Copy the sorted-index entry into every permutation so symmetry is exact."""
    if rank < 2:
        return part
    index = _canonical_index(part.shape[-1], rank)
    return part[(Ellipsis,) + index]


def _sym2(x: np.ndarray) -> np.ndarray:
    return x + np.swapaxes(x, -1, -2)


def _sym3_left(x: np.ndarray) -> np.ndarray:
    # x[..., u, v, w] = A_uv B_w
    return x + np.swapaxes(x, -1, -2) + np.moveaxis(x, -1, -3)


def _sym3_right(x: np.ndarray) -> np.ndarray:
    # x[..., u, v, w] = A_u B_vw
    return x + np.swapaxes(x, -3, -2) + np.moveaxis(x, -3, -1)


def _leibniz(a: Parts, b: Parts, mul: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> Parts:
    """
    Product rule through order 3.

    ``mul(x, y)`` is the bilinear pairing of value axes; it must append the
    derivative axes of ``x`` and then those of ``y``.
    """
    order = len(a) - 1
    out = [mul(a[0], b[0])]
    if order >= 1:
        out.append(mul(a[1], b[0]) + mul(a[0], b[1]))
    if order >= 2:
        out.append(mul(a[2], b[0]) + mul(a[0], b[2]) + _sym2(mul(a[1], b[1])))
    if order >= 3:
        out.append(mul(a[3], b[0]) + mul(a[0], b[3])
                   + _sym3_left(mul(a[2], b[1])) + _sym3_right(mul(a[1], b[2])))
    return tuple(out)


def _compose(a: Parts, derivs: Sequence[float]) -> Parts:
    """Chain rule (Faa di Bruno through order 3) for a scalar function with derivatives ``derivs``."""
    order = len(a) - 1
    out = [np.asarray(derivs[0], dtype=float)]
    if order >= 1:
        out.append(derivs[1] * a[1])
    if order >= 2:
        out.append(derivs[2] * np.multiply.outer(a[1], a[1]) + derivs[1] * a[2])
    if order >= 3:
        cube = np.multiply.outer(np.multiply.outer(a[1], a[1]), a[1])
        out.append(derivs[3] * cube
                   + derivs[2] * _sym3_left(np.multiply.outer(a[2], a[1]))
                   + derivs[1] * a[3])
    return tuple(out)


def _finite(parts: Parts) -> bool:
    return all(bool(np.all(np.isfinite(p))) for p in parts)


class Jet:
    """Truncated Taylor expansion of a scalar function of ``dim`` variables."""

    __slots__ = ("dim", "order", "_parts")

    def __init__(self, dim: int, order: int, value: float,
                 grad=None, hess=None, third=None):
        _check_dim_order(dim, order)
        given = [value, grad, hess, third]
        for k in range(order + 1, MAX_ORDER + 1):
            if given[k] is not None:
                raise ArgumentError(f"order-{order} jet cannot carry derivative part {k}")
        parts = []
        for k in range(order + 1):
            shape = (dim,) * k
            if given[k] is None:
                arr = np.zeros(shape)
            else:
                arr = np.array(given[k], dtype=float)
                if arr.shape != shape:
                    raise ArgumentError(f"derivative part {k} must have shape {shape}, got {arr.shape}")
            parts.append(_canonical(arr, k))
        self.dim = dim
        self.order = order
        self._parts = tuple(parts)

    @classmethod
    def _from_parts(cls, dim: int, parts: Parts) -> "Jet":
        jet = cls.__new__(cls)
        jet.dim = dim
        jet.order = len(parts) - 1
        jet._parts = tuple(_canonical(p, k) if k >= 3 else p for k, p in enumerate(parts))
        return jet

    # -- accessors ---------------------------------------------------------

    @property
    def parts(self) -> Parts:
        return self._parts

    @property
    def value(self) -> float:
        return float(self._parts[0])

    @property
    def grad(self) -> Optional[np.ndarray]:
        return self._parts[1] if self.order >= 1 else None

    @property
    def hess(self) -> Optional[np.ndarray]:
        return self._parts[2] if self.order >= 2 else None

    @property
    def third(self) -> Optional[np.ndarray]:
        return self._parts[3] if self.order >= 3 else None

    def is_finite(self) -> bool:
        return _finite(self._parts)

    def checked(self, context: str = "") -> "Jet":
        """Return self, or raise if a NaN/Inf poisoned any part."""
        if not self.is_finite():
            where = f" in {context}" if context else ""
            raise JetEvaluationError(f"non-finite value produced{where}", operation="extract",
                                     value=self.value)
        return self

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise OrderBudgetError(f"cannot raise jet order from {self.order} to {order}")
        _check_dim_order(self.dim, order)
        return Jet._from_parts(self.dim, self._parts[:order + 1])

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.dim != self.dim or other.order != self.order:
                raise ArgumentError(
                    f"jet mismatch: dim/order {self.dim}/{self.order} vs {other.dim}/{other.order}")
            return other
        if isinstance(other, numbers.Real):
            return jet_const(float(other), self.dim, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Jet._from_parts(self.dim, tuple(a + b for a, b in zip(self._parts, other._parts)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Jet._from_parts(self.dim, tuple(a - b for a, b in zip(self._parts, other._parts)))

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __neg__(self) -> "Jet":
        return Jet._from_parts(self.dim, tuple(-p for p in self._parts))

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return Jet._from_parts(self.dim, _leibniz(self._parts, other._parts, np.multiply.outer))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.reciprocal()

    def __pow__(self, exponent):
        if isinstance(exponent, bool) or not isinstance(exponent, numbers.Integral):
            raise ArgumentError(f"jet powers take integer exponents, got {exponent!r}")
        return self._int_pow(int(exponent))

    def reciprocal(self) -> "Jet":
        x = self.value
        if x == 0.0:
            raise JetEvaluationError("division by zero", operation="div", value=x)
        with np.errstate(all="ignore"):
            inv = 1.0 / np.float64(x)
            derivs = (inv, -inv * inv, 2.0 * inv ** 3, -6.0 * inv ** 4)
        return Jet._from_parts(self.dim, _compose(self._parts, derivs))

    def _int_pow(self, k: int) -> "Jet":
        if k == 0:
            return jet_const(1.0, self.dim, self.order)
        if k < 0:
            if self.value == 0.0:
                raise JetEvaluationError("zero raised to a negative power", operation="int_pow",
                                         value=0.0)
            return self._int_pow(-k).reciprocal()
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def apply(self, fn: str) -> "Jet":
        """Apply an elementary function by name (sin, cos, ..., tanh)."""
        return jet_elementary(fn, self)

    def __repr__(self) -> str:
        return f"Jet(dim={self.dim}, order={self.order}, value={self.value!r})"


# -- constructors ----------------------------------------------------------

def jet_const(c: float, dim: int, order: int) -> Jet:
    """Constant jet: value c, all derivative parts zero."""
    _check_dim_order(dim, order)
    return Jet(dim, order, float(c))


def jet_coordinate(i: int, x_i: float, dim: int, order: int) -> Jet:
    """
    Seed jet of coordinate x_i (1-based index, matching the xK names of expressions).

    Args:
        i (int): coordinate index, 1 <= i <= dim
        x_i (float): coordinate value
        dim (int): number of variables
        order (int): jet order

    Returns:
        Jet: value x_i, gradient e_i, higher parts zero
    """
    _check_dim_order(dim, order)
    if not isinstance(i, numbers.Integral) or not 1 <= i <= dim:
        raise ArgumentError(f"coordinate index {i!r} out of range 1..{dim}")
    grad = None
    if order >= 1:
        grad = np.zeros(dim)
        grad[i - 1] = 1.0
    return Jet(dim, order, float(x_i), grad=grad)


# -- elementary functions ----------------------------------------------------

def _sin(x):
    s, c = np.sin(x), np.cos(x)
    return s, c, -s, -c


def _cos(x):
    s, c = np.sin(x), np.cos(x)
    return c, -s, -c, s


def _tan(x):
    t = np.tan(x)
    sec2 = 1.0 + t * t
    return t, sec2, 2.0 * t * sec2, (2.0 + 6.0 * t * t) * sec2


def _exp(x):
    e = np.exp(x)
    return e, e, e, e


def _log(x):
    return np.log(x), 1.0 / x, -1.0 / x ** 2, 2.0 / x ** 3


def _sqrt(x):
    r = np.sqrt(x)
    return r, 0.5 / r, -0.25 / r ** 3, 0.375 / r ** 5


def _sinh(x):
    sh, ch = np.sinh(x), np.cosh(x)
    return sh, ch, sh, ch


def _cosh(x):
    sh, ch = np.sinh(x), np.cosh(x)
    return ch, sh, ch, sh


def _tanh(x):
    t = np.tanh(x)
    sech2 = 1.0 - t * t
    return t, sech2, -2.0 * t * sech2, (6.0 * t * t - 2.0) * sech2


ELEMENTARY: Dict[str, Callable] = {
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "sinh": _sinh,
    "cosh": _cosh,
    "tanh": _tanh,
}

_DOMAINS: Dict[str, Tuple[Callable[[float], bool], str]] = {
    "log": (lambda x: x > 0.0, "argument must be positive"),
    "sqrt": (lambda x: x > 0.0, "argument must be positive"),
    "tan": (lambda x: math.cos(x) != 0.0, "cosine of the argument vanishes"),
}


def jet_elementary(fn: str, a: Jet) -> Jet:
    """
    Chain-rule propagation of an elementary function.

    Raises:
        ArgumentError: unknown function name
        JetEvaluationError: the argument value lies outside the real domain
    """
    if fn not in ELEMENTARY:
        raise ArgumentError(f"unknown elementary function '{fn}'")
    x = a.value
    if fn in _DOMAINS and math.isfinite(x):
        ok, reason = _DOMAINS[fn]
        if not ok(x):
            raise JetEvaluationError(f"{fn}({x!r}): {reason}", operation=fn, value=x)
    with np.errstate(all="ignore"):
        derivs = ELEMENTARY[fn](np.float64(x))
    return Jet._from_parts(a.dim, _compose(a.parts, derivs))


_ARITH: Dict[str, Callable] = {
    "add": lambda a, b: a + b,
    "sub": lambda a, b: a - b,
    "mul": lambda a, b: a * b,
    "div": lambda a, b: a / b,
    "neg": lambda a, b: -a,
    "int_pow": lambda a, b: a ** b,
}


def jet_arith(op: str, a: Jet, b: Union[Jet, int, None] = None) -> Jet:
    """Dispatch one of add, sub, mul, div, neg, int_pow."""
    if op not in _ARITH:
        raise ArgumentError(f"unknown jet operation '{op}'")
    if op == "int_pow" and isinstance(b, Jet):
        raise ArgumentError("int_pow takes an integer exponent")
    return _ARITH[op](a, b)


# -- tensor-valued jets ------------------------------------------------------

class JetArray:
    """
    Array of jets sharing ``dim`` and ``order``.

    Part k has shape ``shape + (dim,) * k``: the derivative axes come last.
    """

    __slots__ = ("dim", "order", "_parts")

    def __init__(self, dim: int, parts: Sequence[np.ndarray]):
        order = len(parts) - 1
        _check_dim_order(dim, order)
        parts = tuple(np.asarray(p, dtype=float) for p in parts)
        shape = parts[0].shape
        for k, p in enumerate(parts):
            if p.shape != shape + (dim,) * k:
                raise ArgumentError(f"part {k} has shape {p.shape}, expected {shape + (dim,) * k}")
        self.dim = dim
        self.order = order
        self._parts = tuple(_canonical(p, k) if k >= 3 else p for k, p in enumerate(parts))

    @classmethod
    def constant(cls, array, dim: int, order: int) -> "JetArray":
        value = np.asarray(array, dtype=float)
        return cls(dim, [value] + [np.zeros(value.shape + (dim,) * k) for k in range(1, order + 1)])

    @classmethod
    def stack(cls, jets) -> "JetArray":
        """Assemble a nested sequence of Jets into one JetArray of the same nesting shape."""
        grid = np.empty(np.shape(np.empty(_nest_shape(jets))), dtype=object)
        _fill(grid, jets, ())
        flat = list(grid.ravel())
        dim, order = flat[0].dim, flat[0].order
        for jet in flat:
            if jet.dim != dim or jet.order != order:
                raise ArgumentError("cannot stack jets of different dim or order")
        parts = [np.stack([j.parts[k] for j in flat]).reshape(grid.shape + (dim,) * k)
                 for k in range(order + 1)]
        return cls(dim, parts)

    @property
    def parts(self) -> Parts:
        return self._parts

    @property
    def shape(self) -> Tuple[int, ...]:
        return self._parts[0].shape

    @property
    def ndim(self) -> int:
        return self._parts[0].ndim

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

    def is_finite(self) -> bool:
        return _finite(self._parts)

    def checked(self, context: str = "") -> "JetArray":
        if not self.is_finite():
            where = f" in {context}" if context else ""
            raise JetEvaluationError(f"non-finite value produced{where}", operation="extract")
        return self

    def truncate(self, order: int) -> "JetArray":
        if order > self.order:
            raise OrderBudgetError(f"cannot raise jet order from {self.order} to {order}")
        return JetArray(self.dim, self._parts[:order + 1])

    def derivative(self) -> "JetArray":
        """Jet of the partial derivatives; the new axis (derivative index) is last."""
        if self.order < 1:
            raise OrderBudgetError("an order-0 jet carries no derivative")
        return JetArray(self.dim, self._parts[1:])

    def transpose(self, *axes: int) -> "JetArray":
        n = self.ndim
        if sorted(axes) != list(range(n)):
            raise ArgumentError(f"invalid axes {axes} for a rank-{n} jet array")
        return JetArray(self.dim, [p.transpose(tuple(axes) + tuple(range(n, n + k)))
                                   for k, p in enumerate(self._parts)])

    def symmetrized(self) -> "JetArray":
        """Mean of a matrix jet and its transpose."""
        return (self + self.transpose(1, 0)) * 0.5

    def _same(self, other: "JetArray") -> None:
        if not isinstance(other, JetArray):
            raise ArgumentError(f"expected JetArray, got {type(other).__name__}")
        if other.dim != self.dim or other.order != self.order or other.shape != self.shape:
            raise ArgumentError(
                f"jet array mismatch: {self.shape}/{self.order} vs {other.shape}/{other.order}")

    def __add__(self, other: "JetArray") -> "JetArray":
        self._same(other)
        return JetArray(self.dim, [a + b for a, b in zip(self._parts, other._parts)])

    def __sub__(self, other: "JetArray") -> "JetArray":
        self._same(other)
        return JetArray(self.dim, [a - b for a, b in zip(self._parts, other._parts)])

    def __neg__(self) -> "JetArray":
        return JetArray(self.dim, [-p for p in self._parts])

    def __mul__(self, scalar: float) -> "JetArray":
        if not isinstance(scalar, numbers.Real):
            return NotImplemented
        return JetArray(self.dim, [p * float(scalar) for p in self._parts])

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "JetArray":
        if not isinstance(scalar, numbers.Real):
            return NotImplemented
        return JetArray(self.dim, [p / float(scalar) for p in self._parts])

    def inv(self, condition_limit: float = 1e8) -> "JetArray":
        """
        Inverse of a square matrix jet.

        The value is inverted with a pivoted LU factorization; derivative parts
        follow from differentiating H G = I order by order, e.g.
        dH = -H (dG) H.

        Raises:
            SingularMetricError: condition number above ``condition_limit``
        """
        if self.ndim != 2 or self.shape[0] != self.shape[1]:
            raise ArgumentError(f"inverse needs a square matrix jet, got shape {self.shape}")
        g = self._parts
        cond = np.linalg.cond(g[0])
        if not np.isfinite(cond) or cond > condition_limit:
            raise SingularMetricError(
                f"matrix is singular or ill-conditioned (condition number {cond:.3e} > {condition_limit:.1e})")
        h0 = linalg.lu_solve(linalg.lu_factor(g[0]), np.eye(self.shape[0]))
        h = [h0]
        if self.order >= 1:
            h.append(-np.einsum('ij,jka,kl->ila', h0, g[1], h0))
        if self.order >= 2:
            h.append(-(np.einsum('ij,jkab,kl->ilab', h0, g[2], h0)
                       + _sym2(np.einsum('ij,jka,klb->ilab', h0, g[1], h[1]))))
        if self.order >= 3:
            h.append(-(np.einsum('ij,jkabc,kl->ilabc', h0, g[3], h0)
                       + _sym3_left(np.einsum('ij,jkab,klc->ilabc', h0, g[2], h[1]))
                       + _sym3_right(np.einsum('ij,jka,klbc->ilabc', h0, g[1], h[2]))))
        return JetArray(self.dim, h)

    def __repr__(self) -> str:
        return f"JetArray(shape={self.shape}, dim={self.dim}, order={self.order})"


def _nest_shape(jets) -> Tuple[int, ...]:
    if isinstance(jets, Jet):
        return ()
    jets = list(jets)
    if not jets:
        raise ArgumentError("cannot stack an empty sequence of jets")
    inner = _nest_shape(jets[0])
    for item in jets[1:]:
        if _nest_shape(item) != inner:
            raise ArgumentError("ragged nesting in jet stack")
    return (len(jets),) + inner


def _fill(grid: np.ndarray, jets, index: Tuple[int, ...]) -> None:
    if isinstance(jets, Jet):
        grid[index] = jets
        return
    for i, item in enumerate(jets):
        _fill(grid, item, index + (i,))


def _derivative_letters(used: str, count: int) -> str:
    free = [c for c in string.ascii_letters if c not in used]
    return "".join(free[:count])


def _einsum_pair(sa: str, sb: str, so: str, a: JetArray, b: JetArray) -> JetArray:
    letters = _derivative_letters(sa + sb + so, 2 * MAX_ORDER)

    def mul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        kx = x.ndim - len(sa)
        ky = y.ndim - len(sb)
        dx, dy = letters[:kx], letters[kx:kx + ky]
        return np.einsum(f"{sa}{dx},{sb}{dy}->{so}{dx}{dy}", x, y)

    return JetArray(a.dim, _leibniz(a.parts, b.parts, mul))


def _einsum_unary(si: str, so: str, a: JetArray) -> JetArray:
    letters = _derivative_letters(si + so, MAX_ORDER)
    return JetArray(a.dim, [np.einsum(f"{si}{letters[:k]}->{so}{letters[:k]}", p)
                            for k, p in enumerate(a.parts)])


def jet_einsum(subscripts: str, *operands) -> JetArray:
    """
    Einstein summation over jet arrays, differentiated with the product rule.

    Operands may mix JetArrays (all of one dim and order) with plain numpy
    arrays, which are treated as constants. Contractions are carried out
    pairwise from left to right.

    Args:
        subscripts (str): explicit numpy einsum subscripts, e.g. 'kl,ijl->kij'
        *operands: JetArray or array-like

    Returns:
        JetArray: the contracted jet
    """
    if "->" not in subscripts:
        raise ArgumentError("jet_einsum needs explicit output subscripts")
    inputs, output = subscripts.replace(" ", "").split("->")
    specs = inputs.split(",")
    if len(specs) != len(operands):
        raise ArgumentError(f"{len(specs)} subscripts for {len(operands)} operands")
    jets = [op for op in operands if isinstance(op, JetArray)]
    if not jets:
        raise ArgumentError("jet_einsum needs at least one JetArray operand")
    dim, order = jets[0].dim, jets[0].order
    for jet in jets[1:]:
        if jet.dim != dim or jet.order != order:
            raise ArgumentError(
                f"jet_einsum operands disagree: dim/order {dim}/{order} vs {jet.dim}/{jet.order}")
    ops: List[JetArray] = [op if isinstance(op, JetArray) else JetArray.constant(op, dim, order)
                           for op in operands]
    spec, result = specs[0], ops[0]
    for idx in range(1, len(ops)):
        remaining = "".join(specs[idx + 1:]) + output
        keep = "".join(ch for ch in dict.fromkeys(spec + specs[idx]) if ch in remaining)
        result = _einsum_pair(spec, specs[idx], keep, result, ops[idx])
        spec = keep
    if spec != output:
        result = _einsum_unary(spec, output, result)
    return result
