"""
Chart-level structure of an almost Norden manifold.

A Chart holds expression matrices for g and J. At a point the entries are
evaluated as order-2 jets, which is enough for the Levi-Civita coefficients
to order 1 and hence for every curvature quantity. ``NordenPoint`` caches
the derived structure (Christoffel symbols, nabla0 J, F, theta, Omega, R0).

Index layouts (0-based numpy axes):
    christoffel[k, i, j]   Gamma^k_ij
    nabla_J[i, k, j]       (nabla0_{e_i} J)^k_j
    F[i, j, l]             F(e_i, e_j, e_l)
    R0[l, i, j, k]         (R0(e_i, e_j) e_k)^l
    R0_04[x, y, z, w]      g(R0(e_x, e_y) e_z, e_w)
"""
import functools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from src.config import get_settings
from src.errors import ArgumentError, NordenAxiomError, OrderBudgetError
from src.expr import Expression, eval_jet
from src.jets import JetArray, jet_einsum
from src.tensor import (
    AxiomResidual,
    MetricPair,
    Tensor,
    axiom_residuals,
    max_abs,
    metric_pair,
)

logger = logging.getLogger('norden-lab.manifold')

WHICH = ("g", "g_tilde")
POINT_ORDER = 2


@dataclass(frozen=True, eq=False)
class Chart:
    """
    Coordinate presentation of an almost Norden manifold.

    Attributes:
        name: chart name
        n: half the dimension
        domain: (lo, hi) per coordinate
        g_exprs: 2n x 2n expressions for g_ij
        j_exprs: 2n x 2n expressions for J^i_j (row i, column j)
    """
    name: str
    n: int
    domain: Tuple[Tuple[float, float], ...]
    g_exprs: Tuple[Tuple[Expression, ...], ...]
    j_exprs: Tuple[Tuple[Expression, ...], ...]

    def __post_init__(self):
        dim = 2 * self.n
        if self.n < 1:
            raise ArgumentError(f"half-dimension must be positive, got {self.n}")
        if len(self.domain) != dim:
            raise ArgumentError(f"domain has {len(self.domain)} intervals, expected {dim}")
        for lo, hi in self.domain:
            if not lo < hi:
                raise ArgumentError(f"empty domain interval [{lo}, {hi}]")
        for label, matrix in (("g", self.g_exprs), ("J", self.j_exprs)):
            if len(matrix) != dim or any(len(row) != dim for row in matrix):
                raise ArgumentError(f"{label} must be a {dim}x{dim} matrix")

    @property
    def dim(self) -> int:
        return 2 * self.n

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.domain))


def _check_point(c: Chart, p: Sequence[float]) -> Tuple[float, ...]:
    if len(p) != c.dim:
        raise ArgumentError(f"point has {len(p)} coordinates, chart '{c.name}' has {c.dim}")
    return tuple(float(x) for x in p)


def _evaluate_matrix(exprs, p, order: int) -> JetArray:
    return JetArray.stack([[eval_jet(e, p, order) for e in row] for row in exprs])


class JetMetricPair(NamedTuple):
    g: JetArray
    g_tilde: JetArray
    g_inv: JetArray
    g_tilde_inv: JetArray
    J: JetArray
    pair: MetricPair


def metric_pair_at(c: Chart, p: Sequence[float], order: int) -> JetMetricPair:
    """
    g, g~, their inverses and J as jets of the given order at p.

    Raises:
        NordenAxiomError: the axioms fail at p
        SingularMetricError: g or g~ cannot be inverted
    """
    p = _check_point(c, p)
    g = _evaluate_matrix(c.g_exprs, p, order)
    J = _evaluate_matrix(c.j_exprs, p, order)
    try:
        pair = metric_pair(g.value, J.value)
    except NordenAxiomError as exc:
        raise NordenAxiomError(f"chart '{c.name}' at {p}: {exc}", exc.entry, exc.residual) from None
    limit = get_settings().condition_limit
    g = g.symmetrized()
    g_tilde = jet_einsum('ik,kj->ij', g, J).symmetrized()
    return JetMetricPair(g, g_tilde, g.inv(limit), g_tilde.inv(limit), J, pair)


def christoffel(g: JetArray, g_inv: JetArray) -> JetArray:
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), one jet order below g."""
    dg = g.derivative()  # dg[a, b, c] = d_c g_ab
    lowered = (jet_einsum('jli->lij', dg) + jet_einsum('ilj->lij', dg)
               - jet_einsum('ijl->lij', dg)) * 0.5
    return jet_einsum('kl,lij->kij', g_inv.truncate(dg.order), lowered)


def coordinate_curvature(gamma: JetArray) -> np.ndarray:
    """R[l,i,j,k] = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik at the point."""
    if gamma.order < 1:
        raise OrderBudgetError("curvature needs connection coefficients of jet order >= 1")
    G, dG = gamma.value, gamma.grad  # dG[l, j, k, i] = d_i G^l_jk
    return (np.einsum('ljki->lijk', dG) - np.einsum('likj->lijk', dG)
            + np.einsum('lim,mjk->lijk', G, G) - np.einsum('ljm,mik->lijk', G, G))


def lower_curvature(R: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(0,4) form g(R(x,y)z, w)."""
    return np.einsum('wl,lxyz->xyzw', g, R)


class NordenPoint:
    """
    Structure of (M, J, g) at one point, from order-2 jets of g and J.

    Jet-valued attributes carry one derivative order (order 1) so they can be
    differentiated once more, e.g. nabla0 theta or the curvature of a
    connection built from them.
    """

    def __init__(self, g: JetArray, J: JetArray, point: Sequence[float] = (), label: str = ""):
        if g.order < POINT_ORDER or J.order < POINT_ORDER:
            raise OrderBudgetError(f"a NordenPoint needs jets of order >= {POINT_ORDER}")
        if g.shape != J.shape or g.ndim != 2 or g.shape[0] % 2:
            raise ArgumentError(f"g and J must be square of even size, got {g.shape} and {J.shape}")
        self.g = g.truncate(POINT_ORDER)
        self.J = J.truncate(POINT_ORDER)
        self.point = tuple(point)
        self.label = label
        self.dim = g.shape[0]
        self.n = self.dim // 2
        self._memo: Dict[str, object] = {}
        self._twin = None

    def memo(self, key: str, factory: Callable[[], object]):
        """Per-point cache for quantities built by other modules."""
        if key not in self._memo:
            self._memo[key] = factory()
        return self._memo[key]

    @functools.cached_property
    def metric_pair(self) -> MetricPair:
        return metric_pair(self.g.value, self.J.value)

    @functools.cached_property
    def g_inv(self) -> JetArray:
        return self.g.inv(get_settings().condition_limit)

    @functools.cached_property
    def g_tilde(self) -> JetArray:
        return jet_einsum('ik,kj->ij', self.g, self.J).symmetrized()

    @functools.cached_property
    def g1(self) -> JetArray:
        return self.g.truncate(1)

    @functools.cached_property
    def J1(self) -> JetArray:
        return self.J.truncate(1)

    @functools.cached_property
    def christoffel(self) -> JetArray:
        self.metric_pair  # validates the axioms before any derivative work
        return christoffel(self.g, self.g_inv)

    @functools.cached_property
    def nabla_J(self) -> JetArray:
        gamma, J1 = self.christoffel, self.J1
        dJ = self.J.derivative()  # dJ[k, j, i] = d_i J^k_j
        return (jet_einsum('kji->ikj', dJ) + jet_einsum('kim,mj->ikj', gamma, J1)
                - jet_einsum('mij,km->ikj', gamma, J1))

    @functools.cached_property
    def F(self) -> JetArray:
        return jet_einsum('lk,ikj->ijl', self.g1, self.nabla_J)

    @functools.cached_property
    def theta(self) -> JetArray:
        return jet_einsum('ij,ijl->l', self.g_inv.truncate(1), self.F)

    @functools.cached_property
    def theta_J(self) -> JetArray:
        return jet_einsum('m,ml->l', self.theta, self.J1)

    @functools.cached_property
    def omega(self) -> JetArray:
        return jet_einsum('kl,l->k', self.g_inv.truncate(1), self.theta)

    @functools.cached_property
    def J_omega(self) -> JetArray:
        return jet_einsum('km,m->k', self.J1, self.omega)

    @functools.cached_property
    def R0(self) -> np.ndarray:
        return coordinate_curvature(self.christoffel)

    @functools.cached_property
    def R0_04(self) -> np.ndarray:
        return lower_curvature(self.R0, self.g.value)

    def twin(self) -> "NordenPoint":
        """Structure of the twin manifold (M, J, g~)."""
        if self._twin is None:
            self._twin = NordenPoint(self.g_tilde, self.J, self.point, self.label + "~")
        return self._twin


@functools.lru_cache(maxsize=512)
def _chart_point(c: Chart, p: Tuple[float, ...]) -> NordenPoint:
    jets = metric_pair_at(c, p, POINT_ORDER)
    return NordenPoint(jets.g, jets.J, p, c.name)


def chart_point(c: Chart, p: Sequence[float]) -> NordenPoint:
    """Validated, cached NordenPoint of chart c at p."""
    return _chart_point(c, _check_point(c, p))


def _side(c: Chart, p: Sequence[float], which: str) -> NordenPoint:
    if which not in WHICH:
        raise ArgumentError(f"which must be one of {WHICH}, got '{which}'")
    point = chart_point(c, p)
    return point if which == "g" else point.twin()


def levi_civita(c: Chart, p: Sequence[float], which: str = "g", order: int = 1) -> JetArray:
    """Christoffel symbols of g or g~ as jets of the given order (at most 2)."""
    if which not in WHICH:
        raise ArgumentError(f"which must be one of {WHICH}, got '{which}'")
    if not 0 <= order <= 2:
        raise OrderBudgetError(f"Christoffel jets are available to order 2, requested {order}")
    jets = metric_pair_at(c, p, order + 1)
    if which == "g":
        return christoffel(jets.g, jets.g_inv)
    return christoffel(jets.g_tilde, jets.g_tilde_inv)


def tensor_F(c: Chart, p: Sequence[float]) -> Tensor:
    """F(X,Y,Z) = g((nabla0_X J)Y, Z)."""
    return Tensor.of(chart_point(c, p).F.value, "lll")


class LieForms(NamedTuple):
    theta: Tensor
    theta_J: Tensor
    omega: Tensor


def lie_forms(c: Chart, p: Sequence[float]) -> LieForms:
    point = chart_point(c, p)
    return LieForms(Tensor.of(point.theta.value, "l"), Tensor.of(point.theta_J.value, "l"),
                    Tensor.of(point.omega.value, "u"))


# -- classification ----------------------------------------------------------

CLASSES = ("W0", "W1", "W2", "W3", "W1+W2")


@dataclass(frozen=True)
class ClassReport:
    residual_W0: float
    residual_W1: float
    residual_W2_cyclic: float
    residual_theta: float
    residual_W3_cyclic: float
    residual_W12_cyclic: float
    threshold: float
    memberships: Dict[str, bool] = field(default_factory=dict)

    def member(self, name: str) -> bool:
        return self.memberships[name]

    def to_dict(self) -> Dict[str, object]:
        return {
            "residual_W0": self.residual_W0,
            "residual_W1": self.residual_W1,
            "residual_W2_cyclic": self.residual_W2_cyclic,
            "residual_theta": self.residual_theta,
            "residual_W3_cyclic": self.residual_W3_cyclic,
            "residual_W12_cyclic": self.residual_W12_cyclic,
            "memberships": dict(self.memberships),
        }


def w1_part(theta: np.ndarray, m: MetricPair) -> np.ndarray:
    """F1(X,Y,Z) = 1/2n {g(X,Y)th(Z) + g(X,JY)th(JZ) + g(X,Z)th(Y) + g(X,JZ)th(JY)}."""
    g, gt = m.g.components, m.g_tilde.components
    theta_J = theta @ m.J.components
    return (np.einsum('xy,z->xyz', g, theta) + np.einsum('xy,z->xyz', gt, theta_J)
            + np.einsum('xz,y->xyz', g, theta) + np.einsum('xz,y->xyz', gt, theta_J)) / (2 * m.n)


def cyclic_sum(T: np.ndarray) -> np.ndarray:
    """T(x,y,z) + T(y,z,x) + T(z,x,y)."""
    return T + np.einsum('yzx->xyz', T) + np.einsum('zxy->xyz', T)


def classify_tensor(F: Tensor, theta: Tensor, m: MetricPair, threshold: float) -> ClassReport:
    """Class residuals of a given fundamental tensor F with Lie form theta."""
    f = F.components
    F_J = np.einsum('xya,az->xyz', f, m.J.components)  # F(X,Y,JZ)
    r0 = max_abs(f)
    r1 = max_abs(f - w1_part(theta.components, m))
    r2 = max_abs(cyclic_sum(F_J))
    r_theta = theta.norm()
    r3 = max_abs(cyclic_sum(f))
    if r0 < threshold:
        memberships = {name: True for name in CLASSES}
    else:
        memberships = {
            "W0": False,
            "W1": r1 < threshold,
            "W2": r2 < threshold and r_theta < threshold,
            "W3": r3 < threshold,
            "W1+W2": r2 < threshold,
        }
    return ClassReport(r0, r1, r2, r_theta, r3, r2, threshold, memberships)


def classify_point(point: NordenPoint, threshold: float = 1e-8) -> ClassReport:
    return classify_tensor(Tensor.of(point.F.value, "lll"), Tensor.of(point.theta.value, "l"),
                           point.metric_pair, threshold)


def classify(c: Chart, p: Sequence[float], threshold: float = 1e-8) -> ClassReport:
    """Membership of the point in W0, W1, W2, W3 and W1+W2."""
    return classify_point(chart_point(c, p), threshold)


# -- curvature and norms -----------------------------------------------------------

def curvature_R0(c: Chart, p: Sequence[float], which: str = "g") -> Tensor:
    """(0,4) curvature of the Levi-Civita connection of g (or g~, lowered with g~)."""
    return Tensor.of(_side(c, p, which).R0_04, "llll")


class NormReport(NamedTuple):
    norm_sq: float
    norm_sq_alt: float
    isotropic: bool


def nabla_J_norms(point: NordenPoint, tol: float = 1e-8) -> NormReport:
    g_inv, g = point.metric_pair.g_inv.components, point.metric_pair.g.components
    NJ = point.nabla_J.value
    norm_sq = float(np.einsum('ij,kl,ab,iak,jbl->', g_inv, g_inv, g, NJ, NJ))
    norm_sq_alt = 2.0 * float(np.einsum('il,jk,ab,iak,jbl->', g_inv, g_inv, g, NJ, NJ))
    return NormReport(norm_sq, norm_sq_alt, abs(norm_sq) < tol)


def nabla0J_norms(c: Chart, p: Sequence[float], tol: float = 1e-8) -> NormReport:
    """Square norm of nabla0 J by its definition and by the W1+W2 contraction."""
    return nabla_J_norms(chart_point(c, p), tol)


def nijenhuis_tensor(point: NordenPoint) -> np.ndarray:
    J, dJ = point.J.value, point.J.grad  # dJ[k, j, a] = d_a J^k_j
    return (np.einsum('ai,kja->kij', J, dJ) - np.einsum('aj,kia->kij', J, dJ)
            + np.einsum('km,mij->kij', J, dJ) - np.einsum('km,mji->kij', J, dJ))


def nijenhuis(c: Chart, p: Sequence[float]) -> Tensor:
    """N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y] as N[k, i, j]."""
    return Tensor.of(nijenhuis_tensor(chart_point(c, p)), "ull")


# -- axioms and sampling --------------------------------------------------------

class AxiomReport(NamedTuple):
    residuals: List[AxiomResidual]
    condition: float
    worst: AxiomResidual


def check_axioms(c: Chart, p: Sequence[float]) -> AxiomReport:
    """Axiom residuals at p without raising; the worst entry is named."""
    p = _check_point(c, p)
    g = np.array([[eval_jet(e, p, 0).value for e in row] for row in c.g_exprs])
    J = np.array([[eval_jet(e, p, 0).value for e in row] for row in c.j_exprs])
    residuals = axiom_residuals(g, J)
    positive = int(np.sum(np.linalg.eigvalsh(0.5 * (g + g.T)) > 0))
    residuals.append(AxiomResidual("signature", float(abs(positive - c.n)), "signature"))
    condition = float(np.linalg.cond(g))
    return AxiomReport(residuals, condition, max(residuals, key=lambda r: r.residual))


def sample_points(domain: Sequence[Tuple[float, float]], count: int, seed: int) -> List[Tuple[float, ...]]:
    """
    Deterministic Halton points in the domain box.

    The unscrambled sequence (bases 2, 3, 5, ...) is advanced by seed + 1 so
    the origin corner is never drawn.
    """
    if count < 1:
        raise ArgumentError(f"point count must be positive, got {count}")
    if seed < 0:
        raise ArgumentError(f"seed must be non-negative, got {seed}")
    sampler = qmc.Halton(d=len(domain), scramble=False)
    sampler.fast_forward(seed + 1)
    unit = sampler.random(count)
    lo = np.array([d[0] for d in domain], dtype=float)
    hi = np.array([d[1] for d in domain], dtype=float)
    return [tuple(float(x) for x in row) for row in lo + unit * (hi - lo)]
