"""
Identity checks for almost Norden manifolds and their statistical structures.

Every check samples the chart at the configured Halton points, evaluates both
sides of one identity at each point and returns CheckReports. Residuals are
maxima over all coordinate components (the full basis stands in for the
vector arguments X, Y, Z, W). Identities that stack two curvature
computations are held to ten times the run tolerance.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import RunConfig, get_settings
from src.connections import (
    METRIC,
    STRUCTURE,
    TWIN_METRIC,
    ConnectionField,
    StatStructure,
    L_from_Q_at,
    average,
    closed_form_L_q1_at,
    closed_form_L_q2_at,
    conjugacy_array,
    conjugate_complex,
    conjugate_metric,
    connection_distance_at,
    covariant_derivative_array,
    covariant_derivative_at,
    cubic_form_at,
    curvature_04,
    curvature_array,
    levi_civita_connection,
    lichnerowicz_D,
    offset_connection,
    q1_family,
    r4_gap,
    torsion_at,
)
from src.errors import ArgumentError
from src.jets import JetArray, jet_einsum
from src.lab.reports import CheckReport, PointResult, iff_residual, make_report
from src.manifold import (
    Chart,
    NordenPoint,
    check_axioms as axiom_report,
    chart_point,
    classify_point,
    nabla_J_norms,
    nijenhuis_tensor,
    sample_points,
)
from src.tensor import (
    MetricPair,
    Tensor,
    curvature_like_residual,
    is_kahler_tensor,
    max_abs,
    psi_pi_family,
    weyl,
)

logger = logging.getLogger('norden-lab.lab.checks')

CURVATURE_FACTOR = 10.0
ILL_CONDITIONED_RESIDUAL = 1.0


def _config(config: Optional[RunConfig]) -> RunConfig:
    return config if config is not None else RunConfig()


def _coordinates(c: Chart, config: RunConfig):
    return sample_points(c.domain, config.points, config.seed)


def _points(c: Chart, config: RunConfig) -> List[NordenPoint]:
    return [chart_point(c, p) for p in _coordinates(c, config)]


def _points_for(nabla: ConnectionField, config: RunConfig) -> List[NordenPoint]:
    return [nabla.point(p) for p in _coordinates(nabla.chart, config)]


def _plain(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def _result(point: NordenPoint, residual: float, holds: bool = True, note: str = "", **extra) -> PointResult:
    return PointResult(point.point, float(residual), bool(holds), note,
                       {k: _plain(v) for k, v in extra.items()})


def _iff(point: NordenPoint, side_a: float, side_b: float, tol: float, **extra) -> PointResult:
    residual, note = iff_residual(side_a, side_b, tol)
    return _result(point, residual, note=note, side_a=side_a, side_b=side_b, **extra)


def _swap_last(T: np.ndarray) -> np.ndarray:
    return np.swapaxes(T, -1, -2)


def _f_prop_residual(point: NordenPoint) -> float:
    """F(X,Y,Z) = F(X,Z,Y) = F(X,JY,JZ)."""
    F, J = point.F.value, point.J.value
    return max(max_abs(F - _swap_last(F)),
               max_abs(F - np.einsum('xab,ay,bz->xyz', F, J, J)))


def _j_pair(T: np.ndarray, J: np.ndarray) -> np.ndarray:
    """T(X, Y, JZ, JW) for a (0,4) array."""
    return np.einsum('xyab,az,bw->xyzw', T, J, J)


def _scalar_curvature(T: np.ndarray, g_inv: np.ndarray) -> float:
    """g^ij g^xy T(e_i, e_x, e_y, e_j), also for tensors without the Bianchi symmetry."""
    return float(np.einsum('ij,xy,ixyj->', g_inv, g_inv, T))


def random_offset(c: Chart, seed: int) -> ConnectionField:
    """nabla0 plus a constant difference tensor with entries drawn from [-1, 1]."""
    A = np.random.default_rng(seed).uniform(-1.0, 1.0, size=(c.dim,) * 3)
    return offset_connection(c, f"offset{seed}", lambda pt: JetArray.constant(A, c.dim, 1))


def default_roster(c: Chart, config: Optional[RunConfig] = None) -> List[ConnectionField]:
    """nabla0, nabla~0, D, nabla0 + Q1(lambda) and a seeded random offset connection."""
    config = _config(config)
    return [
        levi_civita_connection(c, "g"),
        levi_civita_connection(c, "g_tilde"),
        lichnerowicz_D(c),
        q1_family(c, config.lambdas).nabla,
        random_offset(c, config.seed),
    ]


# -- axioms, classification and fundamentals -------------------------------------------

def check_axioms(c: Chart, config: Optional[RunConfig] = None) -> CheckReport:
    """Almost Norden axioms, neutral signature and conditioning; the worst entry is named."""
    config = _config(config)
    settings = get_settings()
    details = []
    for p in _coordinates(c, config):
        report = axiom_report(c, p)
        residual, note = report.worst.residual, ""
        if residual > settings.axiom_tol:
            note = f"worst entry {report.worst.entry} ({report.worst.name})"
        if report.condition > settings.condition_limit:
            residual = max(residual, ILL_CONDITIONED_RESIDUAL)
            note = "ill-conditioned metric"
        details.append(PointResult(p, float(residual), True, note,
                                   {"worst_entry": report.worst.entry, "condition": report.condition}))
    return make_report("axioms", details, settings.axiom_tol)


def check_classify(c: Chart, config: Optional[RunConfig] = None) -> CheckReport:
    """Fundamental tensor symmetries, with per-point class residuals and memberships."""
    config = _config(config)
    details = []
    for point in _points(c, config):
        classes = classify_point(point, config.tol)
        details.append(_result(point, _f_prop_residual(point), **classes.to_dict()))
    return make_report("classify", details, config.tol)


def check_fundamentals(c: Chart, config: Optional[RunConfig] = None) -> List[CheckReport]:
    config = _config(config)
    tol = config.tol
    nabla0 = levi_civita_connection(c, "g")
    rows: Dict[str, List[PointResult]] = {k: [] for k in ("F-prop", "F-twin-metric", "R0", "metric", "nijenhuis")}
    for point in _points(c, config):
        rows["F-prop"].append(_result(point, _f_prop_residual(point)))
        D_gt = covariant_derivative_at(nabla0, TWIN_METRIC, point)
        rows["F-twin-metric"].append(_result(point, max_abs(D_gt - point.F.value)))
        rows["R0"].append(_result(point, curvature_like_residual(Tensor.of(point.R0_04, "llll"))))
        rows["metric"].append(_result(point, max_abs(covariant_derivative_at(nabla0, METRIC, point))))
        in_w12 = classify_point(point, tol).member("W1+W2")
        rows["nijenhuis"].append(_result(point, max_abs(nijenhuis_tensor(point)), holds=in_w12))
    return [
        make_report("fundamentals/F-prop", rows["F-prop"], tol),
        make_report("fundamentals/F-twin-metric", rows["F-twin-metric"], tol),
        make_report("fundamentals/R0-curvature-like", rows["R0"], tol),
        make_report("fundamentals/nabla0-g", rows["metric"], tol),
        make_report("fundamentals/nijenhuis", rows["nijenhuis"], tol, gated=True),
    ]


# -- conjugate connections ---------------------------------------------------------

def check_prop_2_1(c: Chart, nabla: ConnectionField, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    Any two of (i) nabla* is the g-conjugate, (ii) nabla* is the g~-conjugate,
    (iii) nabla J = 0 imply the third.

    All three implications follow from
    X g~(Y,Z) = g~(nabla_X Y, Z) + g~(Y, nabla*_X Z) + g((nabla_X J)Y, Z)
    for the g-conjugate nabla*, which is checked first.

    Returns:
        List[CheckReport]: identity, (a) (i)+(ii) => (iii), (b) (i)+(iii) => (ii),
        (c) (ii)+(iii) => (i)
    """
    config = _config(config)
    tol = config.tol
    star_g = conjugate_metric(nabla, "g")
    star_gt = conjugate_metric(nabla, "g_tilde")
    rows: Dict[str, List[PointResult]] = {k: [] for k in ("identity", "a", "b", "c")}
    for point in _points_for(nabla, config):
        DJ = covariant_derivative_at(nabla, STRUCTURE, point)
        nabla_J = max_abs(DJ)
        twin_gap = conjugacy_array(nabla, star_g, "g_tilde", point)
        structure_term = np.einsum('zk,xky->xyz', point.g.value, DJ)
        rows["identity"].append(_result(point, max_abs(twin_gap - structure_term)))
        twin_conjugacy = max_abs(twin_gap)
        rows["a"].append(_result(point, nabla_J, holds=twin_conjugacy <= tol, premise=twin_conjugacy))
        rows["b"].append(_result(point, twin_conjugacy, holds=nabla_J <= tol, premise=nabla_J))
        metric_conjugacy = max_abs(conjugacy_array(nabla, star_gt, "g", point))
        rows["c"].append(_result(point, metric_conjugacy, holds=nabla_J <= tol, premise=nabla_J))
    label = nabla.label
    return [
        make_report(f"prop-2.1/identity@{label}", rows["identity"], tol),
        make_report(f"prop-2.1/a@{label}", rows["a"], tol, gated=True),
        make_report(f"prop-2.1/b@{label}", rows["b"], tol, gated=True),
        make_report(f"prop-2.1/c@{label}", rows["c"], tol, gated=True),
    ]


def check_cor_2_1(s: StatStructure, config: Optional[RunConfig] = None) -> CheckReport:
    """(M, J, g~, nabla, nabla*) is statistical iff nabla J = 0."""
    config = _config(config)
    tol = config.tol
    details = []
    for point in _points_for(s.nabla, config):
        D_gt = covariant_derivative_at(s.nabla, TWIN_METRIC, point)
        codazzi = max_abs(D_gt - np.swapaxes(D_gt, 0, 1))
        conjugacy = max_abs(conjugacy_array(s.nabla, s.nabla_star, "g_tilde", point))
        nabla_J = max_abs(covariant_derivative_at(s.nabla, STRUCTURE, point))
        details.append(_iff(point, max(codazzi, conjugacy), nabla_J, tol,
                            codazzi=codazzi, twin_conjugacy=conjugacy))
    return make_report(f"cor-2.1@{s.nabla.label}", details, tol)


def check_prop_2_2(c: Chart, nabla: ConnectionField, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    (i) the g-conjugate and the J-conjugate of nabla coincide iff nabla g~ = 0;
    (ii) the g~-conjugate and the J-conjugate coincide iff nabla g = 0.
    """
    config = _config(config)
    tol = config.tol
    conj_J = conjugate_complex(nabla)
    conj_g = conjugate_metric(nabla, "g")
    conj_gt = conjugate_metric(nabla, "g_tilde")
    part_i, part_ii = [], []
    for point in _points_for(nabla, config):
        part_i.append(_iff(point, connection_distance_at(conj_g, conj_J, point),
                           max_abs(covariant_derivative_at(nabla, TWIN_METRIC, point)), tol))
        part_ii.append(_iff(point, connection_distance_at(conj_gt, conj_J, point),
                            max_abs(covariant_derivative_at(nabla, METRIC, point)), tol))
    return [make_report(f"prop-2.2/i@{nabla.label}", part_i, tol),
            make_report(f"prop-2.2/ii@{nabla.label}", part_ii, tol)]


def check_cor_2_2(c: Chart, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """The Levi-Civita connections are the symmetric ones whose two conjugates coincide."""
    config = _config(config)
    tol = config.tol
    nabla0 = levi_civita_connection(c, "g")
    nabla0_t = levi_civita_connection(c, "g_tilde")
    pairs = (
        ("cor-2.2/i", conjugate_metric(nabla0_t, "g"), conjugate_complex(nabla0_t)),
        ("cor-2.2/ii", conjugate_metric(nabla0, "g_tilde"), conjugate_complex(nabla0)),
    )
    points = _points(c, config)
    return [make_report(check_id, [_result(pt, connection_distance_at(a, b, pt)) for pt in points], tol)
            for check_id, a, b in pairs]


def check_cor_2_3(s: StatStructure, config: Optional[RunConfig] = None,
                  force_hypothesis: bool = False) -> CheckReport:
    """
    If nabla* is also the J-conjugate of nabla, the manifold is Kaehler.

    ``force_hypothesis`` asserts the conclusion regardless of the premise.
    """
    config = _config(config)
    tol = config.tol
    conj_J = conjugate_complex(s.nabla)
    details = []
    for point in _points_for(s.nabla, config):
        premise = connection_distance_at(s.nabla_star, conj_J, point)
        details.append(_result(point, max_abs(point.nabla_J.value), holds=premise <= tol, premise=premise))
    return make_report(f"cor-2.3@{s.nabla.label}", details, tol, gated=True,
                       force_hypothesis=force_hypothesis)


def check_natural_connection(c: Chart, nabla: ConnectionField,
                             config: Optional[RunConfig] = None) -> CheckReport:
    """Self-conjugate relative to g, g~ and J at once iff nabla g = nabla g~ = nabla J = 0."""
    config = _config(config)
    tol = config.tol
    conj_J = conjugate_complex(nabla)
    details = []
    for point in _points_for(nabla, config):
        dg = max_abs(covariant_derivative_at(nabla, METRIC, point))
        dgt = max_abs(covariant_derivative_at(nabla, TWIN_METRIC, point))
        dJ = max_abs(covariant_derivative_at(nabla, STRUCTURE, point))
        self_g = max_abs(conjugacy_array(nabla, nabla, "g", point))
        self_gt = max_abs(conjugacy_array(nabla, nabla, "g_tilde", point))
        self_J = connection_distance_at(conj_J, nabla, point)
        details.append(_iff(point, max(self_g, self_gt, self_J), max(dg, dgt, dJ), tol,
                            nabla_g=dg, nabla_g_tilde=dgt, nabla_J=dJ,
                            self_conjugate_g=self_g, self_conjugate_g_tilde=self_gt,
                            self_conjugate_J=self_J))
    return make_report(f"natural@{nabla.label}", details, tol)


def check_conjugation(c: Chart, config: Optional[RunConfig] = None,
                      roster: Optional[Sequence[ConnectionField]] = None) -> List[CheckReport]:
    """Algebra of the metric and complex conjugations over a roster of connections."""
    config = _config(config)
    tol = config.tol
    roster = list(roster) if roster is not None else default_roster(c, config)
    built = []
    for nabla in roster:
        conj_g, conj_gt, conj_J = (conjugate_metric(nabla, "g"), conjugate_metric(nabla, "g_tilde"),
                                   conjugate_complex(nabla))
        built.append({
            "nabla": nabla,
            "conj_g": conj_g,
            "conj_J": conj_J,
            "back_g": conjugate_metric(conj_g, "g"),
            "back_gt": conjugate_metric(conj_gt, "g_tilde"),
            "back_J": conjugate_complex(conj_J),
            "gJ": conjugate_metric(conj_J, "g"),
            "Jg": conjugate_complex(conj_g),
            "avg_g": average(nabla, conj_g),
            "avg_J": average(nabla, conj_J),
        })
    star0 = conjugate_complex(levi_civita_connection(c, "g"))
    keys = ("involution-metric", "involution-J", "curvature-duality", "metric-dual",
            "average-metric", "average-J", "complex-conjugate-metric")
    rows: Dict[str, List[PointResult]] = {k: [] for k in keys}
    for point in _points(c, config):
        J = point.J.value
        worst = {k: 0.0 for k in keys}
        gap = 0.0
        for item in built:
            nabla = item["nabla"]
            worst["involution-metric"] = max(worst["involution-metric"],
                                             connection_distance_at(item["back_g"], nabla, point),
                                             connection_distance_at(item["back_gt"], nabla, point))
            worst["involution-J"] = max(worst["involution-J"],
                                        connection_distance_at(item["back_J"], nabla, point))
            gap = max(gap, connection_distance_at(item["gJ"], item["Jg"], point))
            R = curvature_04(nabla, point)
            R_star = curvature_04(item["conj_g"], point)
            worst["curvature-duality"] = max(worst["curvature-duality"],
                                             max_abs(R + _swap_last(R_star)))
            D_g = covariant_derivative_at(nabla, METRIC, point)
            D_star_g = covariant_derivative_at(item["conj_J"], METRIC, point)
            worst["metric-dual"] = max(worst["metric-dual"],
                                       max_abs(np.einsum('xab,ay,bz->xyz', D_star_g, J, J) + D_g))
            worst["average-metric"] = max(worst["average-metric"],
                                          max_abs(covariant_derivative_at(item["avg_g"], METRIC, point)))
            worst["average-J"] = max(worst["average-J"],
                                     max_abs(covariant_derivative_at(item["avg_J"], STRUCTURE, point)))
        worst["complex-conjugate-metric"] = max_abs(covariant_derivative_at(star0, METRIC, point))
        for key in keys:
            extra = {"commutation_gap": gap} if key == "involution-J" else {}
            rows[key].append(_result(point, worst[key], **extra))
    tolerances = {"curvature-duality": CURVATURE_FACTOR * tol}
    return [make_report(f"conjugation/{key}", rows[key], tolerances.get(key, tol)) for key in keys]


# -- the Levi-Civita connection and its complex conjugate -------------------------------

def _average_tensor(point: NordenPoint, star: ConnectionField) -> np.ndarray:
    return 0.5 * (point.R0_04 + curvature_04(star, point))


def _kahler_average_residual(point: NordenPoint, star: ConnectionField) -> float:
    """P is Kaehler and equals 1/2 {R0(X,Y,Z,W) - R0(X,Y,JZ,JW)}."""
    P = _average_tensor(point, star)
    expected = 0.5 * (point.R0_04 - _j_pair(point.R0_04, point.J.value))
    kahler = is_kahler_tensor(Tensor.of(P, "llll"), point.metric_pair).residual
    return max(max_abs(P - expected), kahler)


def check_section_3(c: Chart, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    nabla0, its complex conjugate nabla* = nabla0 - J(nabla0 J) and their
    average D (the Lichnerowicz connection).

    Returns:
        List[CheckReport]: JR* = R0 J; P Kaehler with its closed form; D natural;
        K against P; scalar curvatures (W1+W2); theta(Omega) on W1;
        isotropic Kaehler iff tau(K) = tau(P) (W1 or W2); the twin average tensor
    """
    config = _config(config)
    tol = config.tol
    curv_tol = CURVATURE_FACTOR * tol
    nabla0 = levi_civita_connection(c, "g")
    star = conjugate_complex(nabla0)
    star_twin = star.on_twin()
    D = lichnerowicz_D(c)
    D_avg = average(nabla0, star)
    keys = ("conjugate-curvature", "average-kahler", "lichnerowicz", "KP", "scalar",
            "w1-norm", "isotropic", "twin-average")
    rows: Dict[str, List[PointResult]] = {k: [] for k in keys}
    for point in _points(c, config):
        g, J, NJ = point.g.value, point.J.value, point.nabla_J.value
        g_inv = point.metric_pair.g_inv.components
        R_star = curvature_array(star, point)
        rows["conjugate-curvature"].append(_result(point, max_abs(
            np.einsum('kl,lxyz->kxyz', J, R_star) - np.einsum('kxym,mz->kxyz', point.R0, J))))
        rows["average-kahler"].append(_result(point, _kahler_average_residual(point, star)))

        natural = max(max_abs(covariant_derivative_at(D, METRIC, point)),
                      max_abs(covariant_derivative_at(D, TWIN_METRIC, point)),
                      max_abs(covariant_derivative_at(D, STRUCTURE, point)))
        rows["lichnerowicz"].append(_result(point, max(natural, connection_distance_at(D_avg, D, point))))

        P = _average_tensor(point, star)
        K = curvature_04(D, point)
        torsion_term = (np.einsum('xaz,ab,ybw->xyzw', NJ, g, NJ)
                        - np.einsum('xaw,ab,ybz->xyzw', NJ, g, NJ))
        rows["KP"].append(_result(point, max_abs(K - P - 0.25 * torsion_term)))

        classes = classify_point(point, tol)
        norms = nabla_J_norms(point, tol)
        theta_omega = float(point.theta.value @ point.omega.value)
        tau_gap = _scalar_curvature(K, g_inv) - _scalar_curvature(P, g_inv)
        rows["scalar"].append(_result(
            point, abs(tau_gap - (norms.norm_sq - 2.0 * theta_omega) / 8.0), holds=classes.member("W1+W2"),
            norm_sq=norms.norm_sq, norm_sq_alt=norms.norm_sq_alt))
        rows["w1-norm"].append(_result(
            point, abs(theta_omega - 0.5 * point.n * norms.norm_sq), holds=classes.member("W1"),
            theta_omega=theta_omega))
        iff = _iff(point, abs(norms.norm_sq), abs(tau_gap), curv_tol)
        iff.holds = classes.member("W1") or classes.member("W2")
        rows["isotropic"].append(iff)

        twin = point.twin()
        rows["twin-average"].append(_result(twin, _kahler_average_residual(twin, star_twin)))
    return [
        make_report("sec-3/conjugate-curvature", rows["conjugate-curvature"], curv_tol),
        make_report("sec-3/average-kahler", rows["average-kahler"], curv_tol),
        make_report("sec-3/lichnerowicz", rows["lichnerowicz"], tol),
        make_report("sec-3/KP", rows["KP"], curv_tol),
        make_report("sec-3/scalar", rows["scalar"], curv_tol, gated=True),
        make_report("sec-3/w1-norm", rows["w1-norm"], curv_tol, gated=True),
        make_report("sec-3/isotropic", rows["isotropic"], curv_tol, gated=True),
        make_report("sec-3/twin-average", rows["twin-average"], curv_tol),
    ]


def _psi_pi_combination(S: np.ndarray, m: MetricPair, scale: float, n: int) -> np.ndarray:
    """1/2n [psi1 + psi2](S) + scale/4n^2 [pi1 + pi2]."""
    family = psi_pi_family(Tensor.of(S, "ll"), m)
    return ((family.psi1.components + family.psi2.components) / (2 * n)
            + scale * (family.pi1.components + family.pi2.components) / (4 * n * n))


def _lie_form_S(point: NordenPoint) -> np.ndarray:
    """S(X,Y) = (nabla0_X theta)(JY) + 1/2n theta(X) theta(Y)."""
    theta = point.theta.value
    D_theta = covariant_derivative_array(point.christoffel.value, point.theta, "l")
    return D_theta @ point.J.value + np.outer(theta, theta) / (2 * point.n)


def conjugate_curvature_closed_form(point: NordenPoint) -> np.ndarray:
    """R* = R0 - 1/2n [psi1 + psi2](S) - theta(Omega)/4n^2 [pi1 + pi2] on a W1 point."""
    theta_omega = float(point.theta.value @ point.omega.value)
    return point.R0_04 - _psi_pi_combination(_lie_form_S(point), point.metric_pair, theta_omega, point.n)


def _printed_twin_candidate(point: NordenPoint) -> np.ndarray:
    """R~0 - 1/2n [psi1 + psi2](S^) - theta(J Omega)/4n^2 [pi1 + pi2] with S^(X,Y) = -S(X,JY), g-side tensors."""
    S_hat = -_lie_form_S(point) @ point.J.value
    theta_J_omega = float(point.theta.value @ point.J_omega.value)
    return point.twin().R0_04 - _psi_pi_combination(S_hat, point.metric_pair, theta_J_omega, point.n)


def check_prop_3_2(c: Chart, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    Curvature of the complex conjugate of nabla0 on a W1 manifold, and the
    same statement for the twin structure (M, J, g~).
    """
    config = _config(config)
    tol = config.tol
    star = conjugate_complex(levi_civita_connection(c, "g"))
    star_twin = star.on_twin()
    g_side, twin_side = [], []
    for point in _points(c, config):
        R_star = curvature_04(star, point)
        g_side.append(_result(
            point, max_abs(R_star - conjugate_curvature_closed_form(point)),
            holds=classify_point(point, tol).member("W1"),
            curvature_like=curvature_like_residual(Tensor.of(R_star, "llll"))))
        twin = point.twin()
        R_twin = curvature_04(star_twin, twin)
        twin_side.append(_result(
            twin, max_abs(R_twin - conjugate_curvature_closed_form(twin)),
            holds=classify_point(twin, tol).member("W1"),
            curvature_like=curvature_like_residual(Tensor.of(R_twin, "llll")),
            printed_candidate=max_abs(R_twin - _printed_twin_candidate(point))))
    curv_tol = CURVATURE_FACTOR * tol
    return [make_report("prop-3.2/R*", g_side, curv_tol, gated=True),
            make_report("prop-3.2/R~*", twin_side, curv_tol, gated=True)]


# -- statistical structures ----------------------------------------------------------

def _statistical_tensor(s: StatStructure, point: NordenPoint) -> np.ndarray:
    """P = 1/2 (R + R*), both lowered with g."""
    return 0.5 * (curvature_04(s.nabla, point) + curvature_04(s.nabla_star, point))


def check_prop_4_1(s: StatStructure, config: Optional[RunConfig] = None) -> CheckReport:
    """P = R0 + L; when nabla and nabla* are flat, R0 = -L."""
    config = _config(config)
    tol = config.tol
    details = []
    for point in _points_for(s.nabla, config):
        R, R_star = curvature_04(s.nabla, point), curvature_04(s.nabla_star, point)
        L = L_from_Q_at(s, point)
        residual = max_abs(0.5 * (R + R_star) - point.R0_04 - L)
        note = ""
        if max_abs(R) <= tol and max_abs(R_star) <= tol:
            residual = max(residual, max_abs(point.R0_04 + L))
            note = "flat"
        details.append(_result(point, residual, note=note))
    return make_report(f"prop-4.1@{s.nabla.label}", details, CURVATURE_FACTOR * tol)


def check_cor_4_1_and_prop_4_4(s: StatStructure, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    W(P) = W(R0) iff W(L) = 0; for Q1 with lambda3 = lambda4 = 0 the Weyl
    tensors coincide.
    """
    config = _config(config)
    curv_tol = CURVATURE_FACTOR * config.tol
    pure = s.family == "Q1" and s.lambdas[2] == 0.0 and s.lambdas[3] == 0.0
    corollary, proposition = [], []
    for point in _points_for(s.nabla, config):
        m = point.metric_pair
        P = Tensor.of(_statistical_tensor(s, point), "llll")
        weyl_gap = max_abs((weyl(P, m) - weyl(Tensor.of(point.R0_04, "llll"), m)).components)
        weyl_L = max_abs(weyl(Tensor.of(L_from_Q_at(s, point), "llll"), m).components)
        corollary.append(_iff(point, weyl_gap, weyl_L, curv_tol))
        proposition.append(_result(point, weyl_gap, holds=pure, weyl_L=weyl_L))
    label = s.nabla.label
    return [make_report(f"cor-4.1@{label}", corollary, curv_tol),
            make_report(f"prop-4.4@{label}", proposition, curv_tol, gated=True)]


def check_prop_4_3(s: StatStructure, config: Optional[RunConfig] = None) -> CheckReport:
    """
    Closed form of L for the Q1 family against the brute-force
    L = g(Q(X,W),Q(Y,Z)) - g(Q(X,Z),Q(Y,W)). The residual of the printed
    coefficients is recorded per point.
    """
    if s.family != "Q1":
        raise ArgumentError(f"check_prop_4_3 needs a Q1 structure, got {s.family}")
    config = _config(config)
    details = []
    for point in _points_for(s.nabla, config):
        L = L_from_Q_at(s, point)
        printed = max_abs(L - closed_form_L_q1_at(point, s.lambdas, printed=True))
        extra = {"printed_residual": printed}
        if printed > config.tol:
            extra["printed_terms"] = _printed_q1_discrepancy(point, s.lambdas)
        details.append(_result(point, max_abs(L - closed_form_L_q1_at(point, s.lambdas)), **extra))
    return make_report(f"prop-4.3@{s.nabla.label}", details, config.tol)


def _printed_q1_discrepancy(point: NordenPoint, lambdas) -> Dict[str, float]:
    """Contribution of each printed cross term that differs from the derived one."""
    l1, l2, l3, l4 = lambdas
    t, s = point.theta.value, point.theta_J.value
    symmetric = np.outer(t, t) + np.outer(s, s)
    mixed = np.outer(t, s) + np.outer(s, t)
    m = point.metric_pair
    s1 = psi_pi_family(Tensor.of((l1 * l2 + l1 * l3 + l3 * l4 - l2 * l4) * (symmetric - mixed), "ll"), m)
    s2 = psi_pi_family(Tensor.of(-2 * l3 * l4 * (symmetric + mixed), "ll"), m)
    return {"S1 cross term": max_abs(s1.psi1.components), "S2 cross term": max_abs(s2.psi2.components)}


def _prop_4_6_rows(s: StatStructure, config: RunConfig) -> Tuple[List[PointResult], List[PointResult]]:
    if s.family != "Q2":
        raise ArgumentError(f"check_prop_4_6 needs a Q2 structure, got {s.family}")
    tol = config.tol
    closed, isotropic = [], []
    for point in _points_for(s.nabla, config):
        L = L_from_Q_at(s, point)
        closed.append(_result(
            point, max_abs(L - closed_form_L_q2_at(point, s.lambdas)),
            printed_residual=max_abs(L - closed_form_L_q2_at(point, s.lambdas, printed=True))))
        theta_omega = float(point.theta.value @ point.omega.value)
        theta_J_omega = float(point.theta.value @ point.J_omega.value)
        P = _statistical_tensor(s, point)
        isotropic.append(_result(
            point, max(max_abs(L), max_abs(P - point.R0_04)),
            holds=abs(theta_omega) <= tol and abs(theta_J_omega) <= tol,
            theta_omega=theta_omega, theta_J_omega=theta_J_omega))
    return closed, isotropic


def check_prop_4_6(s: StatStructure, config: Optional[RunConfig] = None,
                   isotropic: bool = True) -> List[CheckReport]:
    """
    Closed form of L for the Q2 family, and the consequence for an Omega
    isotropic with respect to both metrics: L = 0 and P = R0.

    With ``isotropic=False`` only the closed-form report is built.
    """
    config = _config(config)
    closed, isotropic_rows = _prop_4_6_rows(s, config)
    reports = [make_report(f"prop-4.6@{s.nabla.label}", closed, config.tol)]
    if isotropic:
        reports.append(_isotropic_report(s, isotropic_rows, config))
    return reports


def check_isotropic_omega(s: StatStructure, config: Optional[RunConfig] = None) -> CheckReport:
    """The gated isotropic-Omega report of check_prop_4_6 on its own."""
    config = _config(config)
    _, isotropic_rows = _prop_4_6_rows(s, config)
    return _isotropic_report(s, isotropic_rows, config)


def _isotropic_report(s: StatStructure, rows: List[PointResult], config: RunConfig) -> CheckReport:
    return make_report(f"isotropic-omega@{s.nabla.label}", rows, CURVATURE_FACTOR * config.tol, gated=True)


def check_statistical(s: StatStructure, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    Statistical structure identities: Q completely symmetric, nabla g = -2Q,
    Codazzi, torsion-free pair, cubic form two ways, the curvature difference
    relation and nabla0 as the average of the pair.
    """
    config = _config(config)
    tol = config.tol
    nabla0 = levi_civita_connection(s.chart, "g")
    pair_average = average(s.nabla, s.nabla_star)
    keys = ("symmetry", "metric", "codazzi", "torsion", "cubic", "curvature-difference", "average")
    rows: Dict[str, List[PointResult]] = {k: [] for k in keys}
    for point in _points_for(s.nabla, config):
        Q_low = s.Q_lowered(point)
        symmetry = max(max_abs(Q_low - np.swapaxes(Q_low, 0, 1)), max_abs(Q_low - _swap_last(Q_low)))
        rows["symmetry"].append(_result(point, symmetry, r4_gap=r4_gap(s, point.point).gap))

        D_g = cubic_form_at(s, point, "metric_derivative")
        rows["metric"].append(_result(point, max_abs(D_g + 2.0 * Q_low)))
        rows["codazzi"].append(_result(point, max_abs(D_g - np.swapaxes(D_g, 0, 1))))
        rows["torsion"].append(_result(point, max(max_abs(torsion_at(s.nabla, point)),
                                                  max_abs(torsion_at(s.nabla_star, point)))))
        rows["cubic"].append(_result(point, max_abs(cubic_form_at(s, point, "difference") - D_g)))

        Q_jet = jet_einsum('wk,kyz->yzw', point.g1, s.Q(point))
        DQ = covariant_derivative_array(point.christoffel.value, Q_jet, "lll")  # DQ[x, y, z, w]
        R, R_star = curvature_04(s.nabla, point), curvature_04(s.nabla_star, point)
        rows["curvature-difference"].append(_result(
            point, max_abs(DQ - np.swapaxes(DQ, 0, 1) - 0.5 * (R - R_star))))
        rows["average"].append(_result(point, connection_distance_at(pair_average, nabla0, point)))
    tolerances = {"curvature-difference": CURVATURE_FACTOR * tol}
    label = s.nabla.label
    return [make_report(f"statistical/{key}@{label}", rows[key], tolerances.get(key, tol)) for key in keys]
