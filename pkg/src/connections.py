"""
Linear connections on a chart as first-class objects.

A ConnectionField maps a NordenPoint to its coefficients Gamma^k_ij as a jet
of order 1 (layout [k, i, j]). Curvature is computed from the difference
tensor against the Levi-Civita connection of g, so only first derivatives of
the coefficients are needed.

Covariant derivatives put the new (differentiating) slot first:
``D[x, ...] = (nabla_{e_x} T)(...)``.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence, Tuple

import numpy as np

from src.errors import ArgumentError, OrderBudgetError
from src.jets import JetArray, jet_einsum
from src.manifold import Chart, NordenPoint, chart_point, coordinate_curvature, lower_curvature
from src.tensor import Tensor, max_abs, psi_pi_family

logger = logging.getLogger('norden-lab.connections')

Rule = Callable[[NordenPoint], JetArray]

_KEYS = itertools.count()


@dataclass(frozen=True, eq=False)
class ConnectionField:
    """
    Connection bound to a chart.

    Attributes:
        label: readable name, e.g. ``conj_J(nabla0)``
        chart: the chart the rule is evaluated on
        source: levi_civita_g, levi_civita_g_tilde or offset
        rule: NordenPoint -> Gamma as an order-1 JetArray
        twin: evaluate on the twin structure (M, J, g~) instead of (M, J, g)
    """
    label: str
    chart: Chart
    source: str
    rule: Rule
    twin: bool = False
    key: int = field(default_factory=lambda: next(_KEYS), repr=False)

    def point(self, p: Sequence[float]) -> NordenPoint:
        point = chart_point(self.chart, p)
        return point.twin() if self.twin else point

    def at(self, point: NordenPoint) -> JetArray:
        """Coefficients at an already built point (memoized on the point)."""
        return point.memo(f"gamma#{self.key}", lambda: self.rule(point).checked(self.label))

    def coefficients(self, p: Sequence[float]) -> JetArray:
        return self.at(self.point(p))

    def difference(self, point: NordenPoint) -> JetArray:
        """A = Gamma - Gamma0, the difference tensor against the Levi-Civita connection."""
        return self.at(point) - point.christoffel

    def on_twin(self) -> "ConnectionField":
        """The same rule evaluated on the twin structure."""
        return ConnectionField(self.label + "~", self.chart, self.source, self.rule, not self.twin)


def _same_base(a: ConnectionField, b: ConnectionField) -> None:
    if a.chart is not b.chart or a.twin != b.twin:
        raise ArgumentError(f"connections '{a.label}' and '{b.label}' live on different charts")


# -- builders ---------------------------------------------------------------------

def levi_civita_connection(c: Chart, which: str = "g") -> ConnectionField:
    """nabla0 (which='g') or nabla~0 (which='g_tilde')."""
    if which == "g":
        return ConnectionField("nabla0", c, "levi_civita_g", lambda pt: pt.christoffel)
    if which == "g_tilde":
        return ConnectionField("nabla~0", c, "levi_civita_g_tilde", lambda pt: pt.twin().christoffel)
    raise ArgumentError(f"which must be 'g' or 'g_tilde', got '{which}'")


def offset_connection(c: Chart, label: str, rule: Rule, twin: bool = False) -> ConnectionField:
    """nabla0 + A for a difference-tensor rule A (layout [k, i, j])."""
    return ConnectionField(label, c, "offset", lambda pt: pt.christoffel + rule(pt), twin)


def _metric_side(point: NordenPoint, which: str) -> Tuple[JetArray, JetArray]:
    if which == "g":
        return point.g, point.g_inv
    if which == "g_tilde":
        twin = point.twin()
        return twin.g, twin.g_inv
    raise ArgumentError(f"which must be 'g' or 'g_tilde', got '{which}'")


def conjugate_metric(nabla: ConnectionField, which: str = "g") -> ConnectionField:
    """
    Conjugate of nabla relative to h = g or g~:
    Gamma*^k_ij = h^kl (d_i h_lj - Gamma^m_il h_mj).
    """
    if which not in ("g", "g_tilde"):
        raise ArgumentError(f"which must be 'g' or 'g_tilde', got '{which}'")

    def rule(point: NordenPoint) -> JetArray:
        h, h_inv = _metric_side(point, which)
        gamma = nabla.at(point)
        dh = h.derivative()  # dh[l, j, i] = d_i h_lj
        inner = jet_einsum('lji->lij', dh) - jet_einsum('mil,mj->lij', gamma, h.truncate(1))
        return jet_einsum('kl,lij->kij', h_inv.truncate(1), inner)

    tag = "g" if which == "g" else "g~"
    return ConnectionField(f"conj_{tag}({nabla.label})", nabla.chart, "offset", rule, nabla.twin)


def conjugate_complex(nabla: ConnectionField) -> ConnectionField:
    """Complex conjugate nabla*_X Y = -J nabla_X (JY)."""

    def rule(point: NordenPoint) -> JetArray:
        gamma = nabla.at(point)
        J1 = point.J1
        dJ = point.J.derivative()  # dJ[l, j, i] = d_i J^l_j
        return -(jet_einsum('kl,lji->kij', J1, dJ) + jet_einsum('kl,lim,mj->kij', J1, gamma, J1))

    return ConnectionField(f"conj_J({nabla.label})", nabla.chart, "offset", rule, nabla.twin)


def average(nabla: ConnectionField, nabla_star: ConnectionField) -> ConnectionField:
    """Coefficient mean of two connections on the same chart."""
    _same_base(nabla, nabla_star)
    if nabla.key == nabla_star.key:
        return nabla
    return ConnectionField(f"avg({nabla.label},{nabla_star.label})", nabla.chart, "offset",
                           lambda pt: (nabla.at(pt) + nabla_star.at(pt)) * 0.5, nabla.twin)


def lichnerowicz_D(c: Chart, twin: bool = False) -> ConnectionField:
    """D_X Y = nabla0_X Y - 1/2 J (nabla0_X J) Y."""

    def rule(point: NordenPoint) -> JetArray:
        return point.christoffel - jet_einsum('km,imj->kij', point.J1, point.nabla_J) * 0.5

    return ConnectionField("D", c, "offset", rule, twin)


# -- pointwise tensors of a connection ----------------------------------------------

def covariant_derivative_array(gamma: np.ndarray, field_jet: JetArray, variance: str) -> np.ndarray:
    """
    Coordinate covariant derivative of a tensor field at a point.

    One Gamma correction per slot; the result has the new slot first.
    """
    if field_jet.order < 1:
        raise OrderBudgetError("covariant derivative needs a field jet of order >= 1")
    if len(variance) != field_jet.ndim:
        raise ArgumentError(f"variance '{variance}' does not match a rank-{field_jet.ndim} field")
    value = field_jet.value
    out = np.array(np.moveaxis(field_jet.grad, -1, 0))
    for s, code in enumerate(variance):
        if code == "u":
            out += np.moveaxis(np.tensordot(gamma, value, axes=([2], [s])), 0, s + 1)
        elif code == "l":
            out -= np.moveaxis(np.tensordot(gamma, value, axes=([0], [s])), 1, s + 1)
        else:
            raise ArgumentError(f"variance code must use 'u' and 'l', got '{variance}'")
    return out


@dataclass(frozen=True)
class TensorField:
    """A tensor field given by a rule producing an order >= 1 jet at each point."""
    name: str
    variance: str
    rule: Callable[[NordenPoint], JetArray]


METRIC = TensorField("g", "ll", lambda pt: pt.g)
TWIN_METRIC = TensorField("g~", "ll", lambda pt: pt.g_tilde)
STRUCTURE = TensorField("J", "ul", lambda pt: pt.J)


def covariant_derivative_at(nabla: ConnectionField, T: TensorField, point: NordenPoint) -> np.ndarray:
    return covariant_derivative_array(nabla.at(point).value, T.rule(point), T.variance)


def covariant_derivative(nabla: ConnectionField, T: TensorField, p: Sequence[float]) -> Tensor:
    """nabla T at p as a Tensor of rank + 1 (new lower slot first)."""
    point = nabla.point(p)
    return Tensor.of(covariant_derivative_at(nabla, T, point), "l" + T.variance)


def metric_derivative(nabla: ConnectionField, which: str, p: Sequence[float]) -> Tensor:
    """(nabla_X h)(Y, Z) for h = g or g~."""
    if which not in ("g", "g_tilde"):
        raise ArgumentError(f"which must be 'g' or 'g_tilde', got '{which}'")
    return covariant_derivative(nabla, METRIC if which == "g" else TWIN_METRIC, p)


def structure_derivative(nabla: ConnectionField, p: Sequence[float]) -> Tensor:
    """(nabla_X J)^k_j as [x, k, j]."""
    return covariant_derivative(nabla, STRUCTURE, p)


def torsion_at(nabla: ConnectionField, point: NordenPoint) -> np.ndarray:
    gamma = nabla.at(point).value
    return gamma - np.swapaxes(gamma, 1, 2)


def torsion(nabla: ConnectionField, p: Sequence[float]) -> Tensor:
    """T^k_ij = Gamma^k_ij - Gamma^k_ji."""
    return Tensor.of(torsion_at(nabla, nabla.point(p)), "ull")


def conjugacy_array(nabla: ConnectionField, nabla_star: ConnectionField, which: str,
                    point: NordenPoint) -> np.ndarray:
    """X h(Y,Z) - h(nabla_X Y, Z) - h(Y, nabla*_X Z) as [x, y, z]."""
    _same_base(nabla, nabla_star)
    h, _ = _metric_side(point, which)
    gamma, gamma_star = nabla.at(point).value, nabla_star.at(point).value
    dh = np.moveaxis(h.grad, -1, 0)  # dh[x, y, z] = d_x h_yz
    return (dh - np.einsum('mxy,mz->xyz', gamma, h.value)
            - np.einsum('mxz,ym->xyz', gamma_star, h.value))


def conjugacy_residual(nabla: ConnectionField, nabla_star: ConnectionField, which: str,
                       p: Sequence[float]) -> float:
    return max_abs(conjugacy_array(nabla, nabla_star, which, nabla.point(p)))


def connection_distance_at(a: ConnectionField, b: ConnectionField, point: NordenPoint) -> float:
    _same_base(a, b)
    return max_abs(a.at(point).value - b.at(point).value)


def connection_distance(a: ConnectionField, b: ConnectionField, p: Sequence[float]) -> float:
    """Largest coefficient difference at p."""
    return connection_distance_at(a, b, a.point(p))


# -- curvature ------------------------------------------------------------------------

class CurvaturePair(NamedTuple):
    R_1_3: Tensor
    R_0_4: Tensor


def curvature_array(nabla: ConnectionField, point: NordenPoint) -> np.ndarray:
    """
    (1,3) curvature R[l, x, y, z] of nabla = nabla0 + A:
    R = R0 + (nabla0_x A)(y,z) - (nabla0_y A)(x,z) + A(x, A(y,z)) - A(y, A(x,z)).
    """

    def build():
        A = nabla.difference(point)
        DA = covariant_derivative_array(point.christoffel.value, A, "ull")  # DA[x, l, y, z]
        a = A.value
        return (point.R0 + np.einsum('xlyz->lxyz', DA) - np.einsum('ylxz->lxyz', DA)
                + np.einsum('lxm,myz->lxyz', a, a) - np.einsum('lym,mxz->lxyz', a, a))

    return point.memo(f"curvature#{nabla.key}", build)


def curvature_04(nabla: ConnectionField, point: NordenPoint) -> np.ndarray:
    """g(R(X,Y)Z, W), lowered with the metric of the point."""
    return lower_curvature(curvature_array(nabla, point), point.g.value)


def curvature(nabla: ConnectionField, p: Sequence[float]) -> CurvaturePair:
    point = nabla.point(p)
    R = curvature_array(nabla, point)
    return CurvaturePair(Tensor.of(R, "ulll"), Tensor.of(lower_curvature(R, point.g.value), "llll"))


def riemann_from_christoffel(gamma: JetArray) -> Tensor:
    """Direct coordinate curvature from Gamma and its first derivatives."""
    return Tensor.of(coordinate_curvature(gamma), "ulll")


# -- statistical structures -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StatStructure:
    """
    nabla = nabla0 + Q and nabla* = nabla0 - Q for a difference-tensor rule Q.

    ``family`` is ``Q1``, ``Q2`` or ``custom``.
    """
    chart: Chart
    nabla: ConnectionField
    nabla_star: ConnectionField
    family: str
    lambdas: Tuple[float, ...]
    q_rule: Rule

    def Q(self, point: NordenPoint) -> JetArray:
        return point.memo(f"Q#{self.nabla.key}", lambda: self.q_rule(point).checked(self.family))

    def Q_lowered(self, point: NordenPoint) -> np.ndarray:
        """Q(X,Y,Z) = g(Q(X,Y), Z) as [x, y, z]."""
        return np.einsum('zk,kxy->xyz', point.g.value, self.Q(point).value)

    def point(self, p: Sequence[float]) -> NordenPoint:
        return self.nabla.point(p)


def statistical_structure(c: Chart, label: str, q_rule: Rule, family: str = "custom",
                          lambdas: Sequence[float] = ()) -> StatStructure:
    """Pair nabla0 +- Q from any difference tensor rule; symmetry of Q is measured, not assumed."""
    nabla = offset_connection(c, label, q_rule)
    nabla_star = offset_connection(c, label + "*", lambda pt: -q_rule(pt))
    return StatStructure(c, nabla, nabla_star, family, tuple(float(x) for x in lambdas), q_rule)


def _check_lambdas(lambdas: Sequence[float]) -> Tuple[float, float, float, float]:
    if len(lambdas) != 4:
        raise ArgumentError(f"exactly four lambda parameters are required, got {len(lambdas)}")
    return tuple(float(x) for x in lambdas)


def _q1_block(alpha: JetArray, B, G: JetArray, V: JetArray) -> JetArray:
    """alpha(X) B(Y) + alpha(Y) B(X) + G(X,Y) V as [k, x, y]."""
    return (jet_einsum('x,ky->kxy', alpha, B) + jet_einsum('y,kx->kxy', alpha, B)
            + jet_einsum('xy,k->kxy', G, V))


def q1_difference(point: NordenPoint, lambdas: Sequence[float]) -> JetArray:
    l1, l2, l3, l4 = _check_lambdas(lambdas)
    identity = np.eye(point.dim)
    theta, theta_J, omega, J_omega = point.theta, point.theta_J, point.omega, point.J_omega
    g1, gt1, J1 = point.g1, point.g_tilde.truncate(1), point.J1
    return (_q1_block(theta, identity, g1, omega) * l1
            + _q1_block(theta_J, identity, g1, J_omega) * l2
            + _q1_block(theta, J1, gt1, omega) * l3
            + _q1_block(theta_J, J1, gt1, J_omega) * l4)


def q2_difference(point: NordenPoint, lambdas: Sequence[float]) -> JetArray:
    l1, l2, l3, l4 = _check_lambdas(lambdas)
    t, s = point.theta, point.theta_J
    tt = jet_einsum('x,y->xy', t, t)
    ss = jet_einsum('x,y->xy', s, s)
    ts = jet_einsum('x,y->xy', t, s) + jet_einsum('x,y->xy', s, t)
    a = tt * l1 + ts * l3 + ss * l4
    b = ss * l2 + tt * l3 + ts * l4
    return jet_einsum('xy,k->kxy', a, point.omega) + jet_einsum('xy,k->kxy', b, point.J_omega)


def q1_family(c: Chart, lambdas: Sequence[float]) -> StatStructure:
    """Four-parameter family built from the metrics and the Lie forms."""
    lam = _check_lambdas(lambdas)
    return statistical_structure(c, f"Q1{lam}", lambda pt: q1_difference(pt, lam), "Q1", lam)


def q2_family(c: Chart, lambdas: Sequence[float]) -> StatStructure:
    """Four-parameter family built from the Lie forms only."""
    lam = _check_lambdas(lambdas)
    return statistical_structure(c, f"Q2{lam}", lambda pt: q2_difference(pt, lam), "Q2", lam)


def cubic_form_at(s: StatStructure, point: NordenPoint, via: str = "difference") -> np.ndarray:
    if via == "difference":
        diff = s.nabla_star.at(point).value - s.nabla.at(point).value
        return np.einsum('zk,kxy->xyz', point.g.value, diff)
    if via == "metric_derivative":
        return covariant_derivative_at(s.nabla, METRIC, point)
    raise ArgumentError(f"via must be 'difference' or 'metric_derivative', got '{via}'")


def cubic_form(s: StatStructure, p: Sequence[float], via: str = "difference") -> Tensor:
    """C(X,Y,Z) = g(nabla*_X Y - nabla_X Y, Z), or (nabla_X g)(Y,Z) with via='metric_derivative'."""
    return Tensor.of(cubic_form_at(s, s.point(p), via), "lll")


def L_from_Q_at(s: StatStructure, point: NordenPoint) -> np.ndarray:
    g, Q = point.g.value, s.Q(point).value
    return (np.einsum('ab,axw,byz->xyzw', g, Q, Q) - np.einsum('ab,axz,byw->xyzw', g, Q, Q))


def L_from_Q(s: StatStructure, p: Sequence[float]) -> Tensor:
    """L(X,Y,Z,W) = g(Q(X,W), Q(Y,Z)) - g(Q(X,Z), Q(Y,W))."""
    return Tensor.of(L_from_Q_at(s, s.point(p)), "llll")


class R4Gap(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray
    gap: float


def r4_gap(s: StatStructure, p: Sequence[float]) -> R4Gap:
    """Both sides of Q(X, Q(Y,Z), W) = g(Q(X,W), Q(Y,Z)); equal only when Q is completely symmetric."""
    point = s.point(p)
    Q, Q_low = s.Q(point).value, s.Q_lowered(point)
    lhs = np.einsum('xmw,myz->xyzw', Q_low, Q)
    rhs = np.einsum('ab,axw,byz->xyzw', point.g.value, Q, Q)
    return R4Gap(lhs, rhs, max_abs(lhs - rhs))


# -- closed forms of L -------------------------------------------------------------------

def _lie_values(point: NordenPoint):
    t, s = point.theta.value, point.theta_J.value
    p = float(t @ point.omega.value)
    q = float(t @ point.J_omega.value)
    return t, s, p, q


def closed_form_L_q1_at(point: NordenPoint, lambdas: Sequence[float], printed: bool = False) -> np.ndarray:
    """
    L = psi1(S1) + psi2(S2) + |A|^2 pi1 + |B|^2 pi2 - <A,B> pi3 for the Q1 family.

    ``printed=True`` uses the cross terms theta x theta + thetaJ x thetaJ in S1
    and -2 l3 l4 (theta x theta + thetaJ x thetaJ) in S2 instead of the derived
    mixed terms.
    """
    l1, l2, l3, l4 = _check_lambdas(lambdas)
    t, s, p, q = _lie_values(point)
    m = point.metric_pair
    tt, ss = np.outer(t, t), np.outer(s, s)
    mixed = np.outer(t, s) + np.outer(s, t)
    c_tt = l1 ** 2 + l3 ** 2 - 2 * l2 * l3
    c_ss = l2 ** 2 + l4 ** 2 + 2 * l1 * l4
    c_x = l1 * l2 + l1 * l3 + l3 * l4 - l2 * l4
    if printed:
        S1 = c_tt * tt + c_ss * ss + c_x * (tt + ss)
        S2 = (l3 ** 2 - l4 ** 2) * (tt - ss) - 2 * l3 * l4 * (tt + ss)
    else:
        S1 = c_tt * tt + c_ss * ss + c_x * mixed
        S2 = (l3 ** 2 - l4 ** 2) * (tt - ss) + 2 * l3 * l4 * mixed
    fam1 = psi_pi_family(Tensor.of(S1, "ll"), m)
    fam2 = psi_pi_family(Tensor.of(S2, "ll"), m)
    a_sq = (l1 ** 2 - l2 ** 2) * p + 2 * l1 * l2 * q
    b_sq = (l3 ** 2 - l4 ** 2) * p + 2 * l3 * l4 * q
    a_b = (l1 * l3 - l2 * l4) * p + (l1 * l4 + l2 * l3) * q
    return (fam1.psi1.components + fam2.psi2.components + a_sq * fam1.pi1.components
            + b_sq * fam1.pi2.components - a_b * fam1.pi3.components)


def q2_alpha(lambdas: Sequence[float], p: float, q: float, printed: bool = False) -> float:
    l1, l2, l3, l4 = _check_lambdas(lambdas)
    q_coeff = l1 * l2 + l3 * l4 if printed else l1 * l2 - l3 * l4
    return (l3 ** 2 - l4 ** 2 - l1 * l4 + l2 * l3) * p - q_coeff * q


def closed_form_L_q2_at(point: NordenPoint, lambdas: Sequence[float], printed: bool = False) -> np.ndarray:
    """L = alpha w(X,Y) w(Z,W) with w(X,Y) = theta(X)theta(JY) - theta(JX)theta(Y)."""
    t, s, p, q = _lie_values(point)
    w = np.outer(t, s) - np.outer(s, t)
    return q2_alpha(lambdas, p, q, printed) * np.einsum('xy,zw->xyzw', w, w)


def closed_form_L_q1(s: StatStructure, p: Sequence[float], printed: bool = False) -> Tensor:
    if s.family != "Q1":
        raise ArgumentError(f"closed form for Q1 applied to a {s.family} structure")
    return Tensor.of(closed_form_L_q1_at(s.point(p), s.lambdas, printed), "llll")


def closed_form_L_q2(s: StatStructure, p: Sequence[float], printed: bool = False) -> Tensor:
    if s.family != "Q2":
        raise ArgumentError(f"closed form for Q2 applied to a {s.family} structure")
    return Tensor.of(closed_form_L_q2_at(s.point(p), s.lambdas, printed), "llll")
