"""
Check reports and the residual bookkeeping shared by every suite.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

logger = logging.getLogger('norden-lab.lab.reports')

UNCONDITIONAL = "unconditional"
MET = "met"
NOT_MET = "not-met"

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

INDETERMINATE = "indeterminate"


@dataclass
class PointResult:
    """Residual of one check at one sample point."""
    point: Tuple[float, ...]
    residual: float
    holds: bool = True
    note: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"point": list(self.point), "residual": self.residual}
        if self.note:
            data["note"] = self.note
        data.update(self.extra)
        return data


@dataclass
class CheckReport:
    """
    Outcome of one named identity check.

    ``status`` is skipped iff the hypothesis is not met; otherwise pass iff
    ``max_residual <= tolerance``.
    """
    check_id: str
    hypothesis: str
    tolerance: float
    details: List[PointResult] = field(default_factory=list)

    @property
    def points_tested(self) -> int:
        return len(self.details)

    @property
    def max_residual(self) -> float:
        return max((d.residual for d in self.details), default=0.0)

    @property
    def status(self) -> str:
        if self.hypothesis == NOT_MET:
            return SKIPPED
        return PASS if self.max_residual <= self.tolerance else FAIL

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check_id,
            "hypothesis": self.hypothesis,
            "points_tested": self.points_tested,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "status": self.status,
            "details": [d.to_dict() for d in self.details],
        }


def make_report(check_id: str, details: Sequence[PointResult], tolerance: float,
                gated: bool = False, force_hypothesis: bool = False) -> CheckReport:
    """
    Assemble a report; with ``gated`` the hypothesis is met only if it holds at every point.
    """
    if not gated:
        hypothesis = UNCONDITIONAL
    elif force_hypothesis or all(d.holds for d in details):
        hypothesis = MET
    else:
        hypothesis = NOT_MET
    report = CheckReport(check_id, hypothesis, tolerance, list(details))
    if report.status == SKIPPED:
        failing = sum(1 for d in details if not d.holds)
        logger.warning(f"{check_id}: hypothesis not met at {failing} of {len(details)} points, skipped")
    elif report.status == FAIL:
        logger.info(f"{check_id}: FAIL (max residual {report.max_residual:.3e} > {tolerance:.1e})")
    else:
        logger.info(f"{check_id}: {report.status} (max residual {report.max_residual:.3e})")
    return report


def iff_residual(side_a: float, side_b: float, tol: float) -> Tuple[float, str]:
    """
    Residual of the biconditional side_a <= tol  <=>  side_b <= tol.

    Both true: the larger side. Both false: 0. Inconsistent: the failing
    side's residual. A side within a factor 10 of tol is indeterminate and
    counts as a failure.
    """
    a_true, b_true = side_a <= tol, side_b <= tol
    if a_true and b_true:
        residual, note = max(side_a, side_b), ""
    elif not a_true and not b_true:
        residual, note = 0.0, "both sides false"
    else:
        residual, note = (side_b if a_true else side_a), "sides disagree"
    if any(tol / 10.0 <= side <= tol * 10.0 for side in (side_a, side_b)):
        logger.warning(f"indeterminate biconditional: sides {side_a:.3e}, {side_b:.3e} near tol {tol:.1e}")
        return max(residual, tol * 10.0), INDETERMINATE
    return residual, note


def summarize(reports: Sequence[CheckReport]) -> Dict[str, int]:
    counts = {PASS: 0, FAIL: 0, SKIPPED: 0}
    for report in reports:
        counts[report.status] += 1
    return counts
