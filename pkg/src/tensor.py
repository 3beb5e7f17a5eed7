"""
Pointwise dense tensor algebra over a neutral-signature metric.

Slots are numpy axes (0-based). Each Tensor records the variance of every
slot; contractions and index movement check it.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from src.config import get_settings
from src.errors import (
    ArgumentError,
    NordenAxiomError,
    SingularMetricError,
    UnsupportedDimensionError,
)

logger = logging.getLogger('norden-lab.tensor')


class Variance(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


_CODES = {"l": Variance.LOWER, "u": Variance.UPPER}


def max_abs(array) -> float:
    """Largest absolute component; 0 for an empty array."""
    array = np.asarray(array, dtype=float)
    return float(np.max(np.abs(array))) if array.size else 0.0


@dataclass(frozen=True, eq=False)
class Tensor:
    """
    Dense tensor at a point.

    Attributes:
        dim: dimension of the underlying space
        variance: variance of each slot, in axis order
        components: array of shape (dim,) * rank, read-only
    """
    dim: int
    variance: Tuple[Variance, ...]
    components: np.ndarray

    def __post_init__(self):
        components = np.array(self.components, dtype=float)
        expected = (self.dim,) * len(self.variance)
        if components.shape != expected:
            raise ArgumentError(f"components have shape {components.shape}, expected {expected}")
        components.setflags(write=False)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "variance", tuple(Variance(v) for v in self.variance))

    @classmethod
    def of(cls, components, variance: str, dim: Optional[int] = None) -> "Tensor":
        """Build from an array and a variance code such as 'ulll' ('u' upper, 'l' lower)."""
        components = np.asarray(components, dtype=float)
        if dim is None:
            if components.ndim == 0:
                raise ArgumentError("a scalar tensor needs an explicit dim")
            dim = components.shape[0]
        try:
            slots = tuple(_CODES[c] for c in variance)
        except KeyError:
            raise ArgumentError(f"variance code must use 'u' and 'l', got '{variance}'") from None
        return cls(dim, slots, components)

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def code(self) -> str:
        return "".join("u" if v is Variance.UPPER else "l" for v in self.variance)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    def _same_type(self, other: "Tensor") -> None:
        if not isinstance(other, Tensor) or other.variance != self.variance or other.dim != self.dim:
            raise ArgumentError("tensors differ in dimension or variance")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._same_type(other)
        return Tensor(self.dim, self.variance, self.components + other.components)

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._same_type(other)
        return Tensor(self.dim, self.variance, self.components - other.components)

    def __neg__(self) -> "Tensor":
        return Tensor(self.dim, self.variance, -self.components)

    def __mul__(self, scalar: float) -> "Tensor":
        return Tensor(self.dim, self.variance, self.components * float(scalar))

    __rmul__ = __mul__

    def norm(self) -> float:
        return max_abs(self.components)

    def to_list(self):
        return self.components.tolist()


def _slot(t: Tensor, slot: int) -> int:
    if not isinstance(slot, (int, np.integer)) or not 0 <= slot < t.rank:
        raise ArgumentError(f"slot {slot!r} out of range for a rank-{t.rank} tensor")
    return int(slot)


def _all_lower(t: Tensor, rank: int, what: str) -> None:
    if t.rank != rank or any(v is not Variance.LOWER for v in t.variance):
        raise ArgumentError(f"{what} needs a rank-{rank} all-lower tensor, got '{t.code}'")


def _dims_match(*tensors: Tensor) -> int:
    dims = {t.dim for t in tensors}
    if len(dims) != 1:
        raise ArgumentError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


# -- metric pair -------------------------------------------------------------

class AxiomResidual(NamedTuple):
    name: str
    residual: float
    entry: str


def _worst(array: np.ndarray, label: str) -> Tuple[float, str]:
    absolute = np.abs(array)
    index = np.unravel_index(int(np.argmax(absolute)), absolute.shape)
    return float(absolute[index]), label + "".join(f"[{i + 1}]" for i in index)


def axiom_residuals(g, J) -> List[AxiomResidual]:
    """
    Residuals of the almost Norden axioms for component matrices g and J.

    Entry labels are 1-based, e.g. ``J^2[1][3]``.
    """
    g = np.asarray(g, dtype=float)
    J = np.asarray(J, dtype=float)
    identity = np.eye(g.shape[0])
    checks = (
        ("symmetry", g - g.T, "g"),
        ("complex", J @ J + identity, "J^2"),
        ("norden", J.T @ g @ J + g, "g(J,J)"),
    )
    return [AxiomResidual(name, *_worst(array, label)) for name, array, label in checks]


@dataclass(frozen=True, eq=False)
class MetricPair:
    """Norden metric g, its twin g~(X,Y) = g(X,JY), both inverses and J at one point."""
    g: Tensor
    g_tilde: Tensor
    g_inv: Tensor
    g_tilde_inv: Tensor
    J: Tensor

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def n(self) -> int:
        return self.g.dim // 2

    def twin(self) -> "MetricPair":
        """The pair (g~, J); its own twin metric is -g."""
        return MetricPair(self.g_tilde, -self.g, self.g_tilde_inv, -self.g_inv, self.J)


def _inverse(matrix: np.ndarray, label: str, condition_limit: float) -> np.ndarray:
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > condition_limit:
        raise SingularMetricError(
            f"{label} is singular or ill-conditioned (condition number {cond:.3e} > {condition_limit:.1e})")
    return linalg.lu_solve(linalg.lu_factor(matrix), np.eye(matrix.shape[0]))


def metric_pair(g, J, axiom_tol: Optional[float] = None,
                symmetry_tol: Optional[float] = None) -> MetricPair:
    """
    Validate g and J at a point and assemble the MetricPair.

    Raises:
        NordenAxiomError: symmetry, J^2 = -I, g(J.,J.) = -g or neutral signature fails
        SingularMetricError: g or g~ too badly conditioned to invert
    """
    settings = get_settings()
    axiom_tol = settings.axiom_tol if axiom_tol is None else axiom_tol
    symmetry_tol = settings.symmetry_tol if symmetry_tol is None else symmetry_tol
    g = np.asarray(g, dtype=float)
    J = np.asarray(J, dtype=float)
    dim = g.shape[0]
    if g.shape != (dim, dim) or J.shape != (dim, dim) or dim % 2:
        raise ArgumentError(f"g and J must be square of even size, got {g.shape} and {J.shape}")
    for item in axiom_residuals(g, J):
        tol = symmetry_tol if item.name == "symmetry" else axiom_tol
        if item.residual > tol:
            raise NordenAxiomError(
                f"almost Norden axiom '{item.name}' violated at {item.entry}: residual {item.residual:.3e}",
                entry=item.entry, residual=item.residual)
    g = 0.5 * (g + g.T)
    g_inv = _inverse(g, "g", settings.condition_limit)
    g_tilde = g @ J
    g_tilde = 0.5 * (g_tilde + g_tilde.T)
    g_tilde_inv = _inverse(g_tilde, "twin metric", settings.condition_limit)
    positive = int(np.sum(linalg.eigvalsh(g) > 0))
    if positive != dim // 2:
        raise NordenAxiomError(f"g has signature ({positive},{dim - positive}), expected neutral",
                               entry="signature", residual=float(abs(positive - dim // 2)))
    return MetricPair(
        g=Tensor.of(g, "ll"),
        g_tilde=Tensor.of(g_tilde, "ll"),
        g_inv=Tensor.of(g_inv, "uu"),
        g_tilde_inv=Tensor.of(g_tilde_inv, "uu"),
        J=Tensor.of(J, "ul"),
    )


# -- contraction and index movement -----------------------------------------

def contract(t: Tensor, slot_a: int, slot_b: int) -> Tensor:
    """Trace over one upper and one lower slot."""
    a, b = _slot(t, slot_a), _slot(t, slot_b)
    if a == b:
        raise ArgumentError("cannot contract a slot with itself")
    if t.variance[a] is t.variance[b]:
        raise ArgumentError(
            f"slots {a} and {b} are both {t.variance[a].value}; use contract_with_metric")
    components = np.trace(t.components, axis1=a, axis2=b)
    variance = tuple(v for i, v in enumerate(t.variance) if i not in (a, b))
    return Tensor(t.dim, variance, components)


def move_index(t: Tensor, slot: int, direction: str, m: MetricPair) -> Tensor:
    """Raise (with g^-1) or lower (with g) one slot."""
    s = _slot(t, slot)
    _dims_match(t, m.g)
    if direction == "raise":
        needed, metric, target = Variance.LOWER, m.g_inv, Variance.UPPER
    elif direction == "lower":
        needed, metric, target = Variance.UPPER, m.g, Variance.LOWER
    else:
        raise ArgumentError(f"direction must be 'raise' or 'lower', got '{direction}'")
    if t.variance[s] is not needed:
        raise ArgumentError(f"slot {s} is already {t.variance[s].value}")
    components = np.moveaxis(np.tensordot(metric.components, t.components, axes=([1], [s])), 0, s)
    variance = t.variance[:s] + (target,) + t.variance[s + 1:]
    return Tensor(t.dim, variance, components)


def contract_with_metric(t: Tensor, slot_a: int, slot_b: int, m: MetricPair) -> Tensor:
    """Contract two slots of equal variance through the metric."""
    a, b = _slot(t, slot_a), _slot(t, slot_b)
    if t.variance[a] is not t.variance[b]:
        return contract(t, a, b)
    direction = "raise" if t.variance[a] is Variance.LOWER else "lower"
    return contract(move_index(t, a, direction, m), a, b)


# -- Kulkarni-Nomizu machinery -----------------------------------------------

def kulkarni_nomizu(A: Tensor, B: Tensor) -> Tensor:
    """(A o B)(x,y,z,w) = A(y,z)B(x,w) - A(x,z)B(y,w) + A(x,w)B(y,z) - A(y,w)B(x,z)."""
    _all_lower(A, 2, "kulkarni_nomizu")
    _all_lower(B, 2, "kulkarni_nomizu")
    dim = _dims_match(A, B)
    a, b = A.components, B.components
    components = (np.einsum('yz,xw->xyzw', a, b) - np.einsum('xz,yw->xyzw', a, b)
                  + np.einsum('xw,yz->xyzw', a, b) - np.einsum('yw,xz->xyzw', a, b))
    return Tensor(dim, (Variance.LOWER,) * 4, components)


def j_twist(S: Tensor, m: MetricPair) -> Tensor:
    """S~(X,Y) = S(X,JY)."""
    _all_lower(S, 2, "j_twist")
    return Tensor.of(np.einsum('xk,ky->xy', S.components, m.J.components), "ll")


def psi1(S: Tensor, m: MetricPair) -> Tensor:
    return kulkarni_nomizu(m.g, S)


def psi2(S: Tensor, m: MetricPair) -> Tensor:
    return kulkarni_nomizu(m.g_tilde, j_twist(S, m))


@dataclass(frozen=True)
class PsiPiFamily:
    psi1: Tensor
    psi2: Tensor
    pi1: Tensor
    pi2: Tensor
    pi3: Tensor


def psi_pi_family(S: Tensor, m: MetricPair) -> PsiPiFamily:
    """psi1(S), psi2(S) and the three basic tensors pi1 = psi1(g)/2, pi2 = psi2(g)/2, pi3 = -psi1(g~)."""
    _dims_match(S, m.g)
    return PsiPiFamily(
        psi1=psi1(S, m),
        psi2=psi2(S, m),
        pi1=psi1(m.g, m) * 0.5,
        pi2=psi2(m.g, m) * 0.5,
        pi3=-psi1(m.g_tilde, m),
    )


# -- structural predicates -----------------------------------------------------

class PropertyResidual(NamedTuple):
    holds: bool
    residual: float


def curvature_like_residual(L: Tensor) -> float:
    _all_lower(L, 4, "is_curvature_like")
    c = L.components
    return max(
        max_abs(c + np.einsum('yxzw->xyzw', c)),
        max_abs(c + np.einsum('xywz->xyzw', c)),
        max_abs(c + np.einsum('yzxw->xyzw', c) + np.einsum('zxyw->xyzw', c)),
    )


def is_curvature_like(L: Tensor, tol: float = 1e-8) -> PropertyResidual:
    """Antisymmetry in both pairs and the first Bianchi identity."""
    residual = curvature_like_residual(L)
    return PropertyResidual(residual <= tol, residual)


def is_kahler_tensor(L: Tensor, m: MetricPair, tol: float = 1e-8) -> PropertyResidual:
    """Residual of L(X,Y,JZ,JW) + L(X,Y,Z,W)."""
    _all_lower(L, 4, "is_kahler_tensor")
    _dims_match(L, m.g)
    J = m.J.components
    residual = max_abs(np.einsum('xyab,az,bw->xyzw', L.components, J, J) + L.components)
    return PropertyResidual(residual <= tol, residual)


class RicciScalar(NamedTuple):
    rho: Tensor
    tau: float


def ricci_scalar(L: Tensor, m: MetricPair, tol: float = 1e-8) -> RicciScalar:
    """rho(X,Y) = g^ij L(e_i,X,Y,e_j) and tau = g^ij rho(e_i,e_j)."""
    check = is_curvature_like(L, tol)
    if not check.holds:
        logger.warning(f"Ricci contraction of a tensor that is not curvature-like (residual {check.residual:.3e})")
    _dims_match(L, m.g)
    g_inv = m.g_inv.components
    rho = np.einsum('ij,ixyj->xy', g_inv, L.components)
    tau = float(np.einsum('ij,ij->', g_inv, rho))
    return RicciScalar(Tensor.of(rho, "ll"), tau)


def weyl(L: Tensor, m: MetricPair) -> Tensor:
    """W(L) = L - 1/(2(n-1)) {psi1(rho) - tau/(2n-1) pi1} for dim 2n >= 4."""
    if L.dim < 4:
        raise UnsupportedDimensionError(f"the Weyl tensor needs dimension >= 4, got {L.dim}")
    n = L.dim // 2
    rho, tau = ricci_scalar(L, m)
    pi1 = psi1(m.g, m) * 0.5
    return L - (psi1(rho, m) - pi1 * (tau / (2 * n - 1))) * (1.0 / (2 * (n - 1)))
