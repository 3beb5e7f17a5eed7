"""
Verification suites: every identity is evaluated on both sides at sampled
points and summarized in a CheckReport.
"""
from src.lab.checks import (
    check_axioms,
    check_classify,
    check_conjugation,
    check_cor_2_1,
    check_cor_2_2,
    check_cor_2_3,
    check_cor_4_1_and_prop_4_4,
    check_fundamentals,
    check_isotropic_omega,
    check_natural_connection,
    check_prop_2_1,
    check_prop_2_2,
    check_prop_3_2,
    check_prop_4_1,
    check_prop_4_3,
    check_prop_4_6,
    check_section_3,
    check_statistical,
    default_roster,
)
from src.lab.reports import CheckReport, PointResult, iff_residual, make_report, summarize
from src.lab.suites import SUITE_IDS, SUITES, run_all, run_suite

__all__ = [
    "CheckReport", "PointResult", "iff_residual", "make_report", "summarize",
    "SUITE_IDS", "SUITES", "run_all", "run_suite", "default_roster",
    "check_axioms", "check_classify", "check_fundamentals", "check_prop_2_1", "check_cor_2_1",
    "check_prop_2_2", "check_cor_2_2", "check_cor_2_3", "check_natural_connection",
    "check_conjugation", "check_section_3", "check_prop_3_2", "check_prop_4_1",
    "check_cor_4_1_and_prop_4_4", "check_prop_4_3", "check_prop_4_6", "check_isotropic_omega",
    "check_statistical",
]
