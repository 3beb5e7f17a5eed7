"""
Suite registry: stable suite ids mapped to runners over one chart.
"""
import logging
from typing import Callable, Dict, List, Optional

from src.config import RunConfig
from src.connections import q1_family, q2_family
from src.errors import ArgumentError
from src.lab import checks
from src.lab.reports import CheckReport
from src.manifold import Chart

logger = logging.getLogger('norden-lab.lab.suites')

SuiteRunner = Callable[[Chart, RunConfig], List[CheckReport]]


def _families(c: Chart, config: RunConfig):
    return [q1_family(c, config.lambdas), q2_family(c, config.lambdas)]


def _over_roster(check) -> SuiteRunner:
    def run(c: Chart, config: RunConfig) -> List[CheckReport]:
        reports: List[CheckReport] = []
        for nabla in checks.default_roster(c, config):
            result = check(c, nabla, config)
            reports.extend(result if isinstance(result, list) else [result])
        return reports
    return run


def _over_families(check) -> SuiteRunner:
    def run(c: Chart, config: RunConfig) -> List[CheckReport]:
        reports: List[CheckReport] = []
        for s in _families(c, config):
            result = check(s, config)
            reports.extend(result if isinstance(result, list) else [result])
        return reports
    return run


def _cor_4_1(c: Chart, config: RunConfig) -> List[CheckReport]:
    return [checks.check_cor_4_1_and_prop_4_4(s, config)[0] for s in _families(c, config)]


def _prop_4_4(c: Chart, config: RunConfig) -> List[CheckReport]:
    l1, l2 = config.lambdas[:2]
    return [checks.check_cor_4_1_and_prop_4_4(q1_family(c, (l1, l2, 0.0, 0.0)), config)[1]]


def _prop_4_3(c: Chart, config: RunConfig) -> List[CheckReport]:
    return [checks.check_prop_4_3(q1_family(c, config.lambdas), config)]


def _prop_4_6(c: Chart, config: RunConfig) -> List[CheckReport]:
    return checks.check_prop_4_6(q2_family(c, config.lambdas), config, isotropic=False)


def _isotropic_omega(c: Chart, config: RunConfig) -> List[CheckReport]:
    return [checks.check_isotropic_omega(q2_family(c, config.lambdas), config)]


SUITES: Dict[str, SuiteRunner] = {
    "axioms": lambda c, config: [checks.check_axioms(c, config)],
    "classify": lambda c, config: [checks.check_classify(c, config)],
    "fundamentals": checks.check_fundamentals,
    "prop-2.1": _over_roster(checks.check_prop_2_1),
    "cor-2.1": _over_families(checks.check_cor_2_1),
    "prop-2.2": _over_roster(checks.check_prop_2_2),
    "cor-2.2": checks.check_cor_2_2,
    "cor-2.3": _over_families(checks.check_cor_2_3),
    "natural": _over_roster(checks.check_natural_connection),
    "conjugation": checks.check_conjugation,
    "sec-3": checks.check_section_3,
    "prop-3.2": checks.check_prop_3_2,
    "prop-4.1": _over_families(checks.check_prop_4_1),
    "cor-4.1": _cor_4_1,
    "prop-4.3": _prop_4_3,
    "prop-4.4": _prop_4_4,
    "prop-4.6": _prop_4_6,
    "isotropic-omega": _isotropic_omega,
    "statistical": _over_families(checks.check_statistical),
}

SUITE_IDS = tuple(SUITES)


def run_suite(suite_id: str, chart: Chart, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """
    Run one suite on a chart.

    Raises:
        ArgumentError: unknown suite id (the message lists the valid ids)
    """
    if suite_id not in SUITES:
        raise ArgumentError(f"unknown suite '{suite_id}'; valid suites: {', '.join(SUITE_IDS)}")
    config = config if config is not None else RunConfig()
    logger.info(f"Running suite {suite_id} on chart '{chart.name}' ({config.points} points, seed {config.seed})")
    reports = SUITES[suite_id](chart, config)
    logger.info(f"Suite {suite_id} finished with {len(reports)} reports")
    return reports


def run_all(chart: Chart, config: Optional[RunConfig] = None) -> List[CheckReport]:
    """Every suite in registry order."""
    reports: List[CheckReport] = []
    for suite_id in SUITE_IDS:
        reports.extend(run_suite(suite_id, chart, config))
    return reports
