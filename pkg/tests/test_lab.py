"""
Tests for check reports and the verification suites.
"""
import unittest
from pathlib import Path

import numpy as np

from src.charts import flat_kahler, load_chart
from src.config import RunConfig
from src.connections import q1_family, q2_family
from src.errors import ArgumentError
from src.lab import (
    SUITE_IDS,
    CheckReport,
    PointResult,
    check_axioms,
    check_cor_2_3,
    check_isotropic_omega,
    check_prop_4_3,
    check_prop_4_6,
    check_section_3,
    iff_residual,
    make_report,
    run_all,
    run_suite,
    summarize,
)
from src.lab.reports import INDETERMINATE

DATA = Path(__file__).resolve().parent.parent / "data"
TOL = 1e-8


class TestReports(unittest.TestCase):
    """Residual bookkeeping shared by every check."""

    def test_iff_both_true(self):
        """Both sides true: the larger side is the residual."""
        self.assertEqual(iff_residual(1e-12, 1e-13, TOL), (1e-12, ""))

    def test_iff_both_false(self):
        """Both sides false: the biconditional holds exactly."""
        self.assertEqual(iff_residual(1.0, 2.0, TOL), (0.0, "both sides false"))

    def test_iff_inconsistent(self):
        """One side true, one false: the failing side's residual."""
        self.assertEqual(iff_residual(1e-12, 0.5, TOL), (0.5, "sides disagree"))
        self.assertEqual(iff_residual(0.25, 1e-14, TOL), (0.25, "sides disagree"))

    def test_iff_indeterminate(self):
        """A side within a factor 10 of tol counts as a failure."""
        residual, note = iff_residual(5e-9, 1e-15, TOL)
        self.assertEqual(note, INDETERMINATE)
        self.assertEqual(residual, 10 * TOL)

    def test_status_and_dict_order(self):
        """pass iff max_residual <= tolerance; keys in their published order."""
        report = make_report("demo", [PointResult((0.1, 0.2), 1e-10), PointResult((0.3, 0.4), 2e-9)], TOL)
        self.assertEqual(report.status, "pass")
        self.assertEqual(report.hypothesis, "unconditional")
        data = report.to_dict()
        self.assertEqual(list(data), ["check", "hypothesis", "points_tested", "max_residual",
                                      "tolerance", "status", "details"])
        self.assertEqual(data["points_tested"], 2)
        self.assertEqual(data["max_residual"], 2e-9)
        self.assertEqual(data["details"][0], {"point": [0.1, 0.2], "residual": 1e-10})

    def test_gated_report(self):
        """A hypothesis failing anywhere skips the report unless forced."""
        details = [PointResult((0.0,), 1.0, holds=True), PointResult((1.0,), 1.0, holds=False)]
        self.assertEqual(make_report("gated", details, TOL, gated=True).status, "skipped")
        forced = make_report("gated", details, TOL, gated=True, force_hypothesis=True)
        self.assertEqual(forced.hypothesis, "met")
        self.assertEqual(forced.status, "fail")

    def test_summarize(self):
        """Counts per status."""
        reports = [CheckReport("a", "unconditional", TOL, [PointResult((0.0,), 0.0)]),
                   CheckReport("b", "unconditional", TOL, [PointResult((0.0,), 1.0)]),
                   CheckReport("c", "not-met", TOL, [])]
        self.assertEqual(summarize(reports), {"pass": 1, "fail": 1, "skipped": 1})


class TestFlatKahler(unittest.TestCase):
    """Every identity holds trivially on the flat chart."""

    def test_no_failures(self):
        """run_all reports nothing but pass or skipped."""
        reports = run_all(flat_kahler(2), RunConfig(points=3))
        failing = [r.check_id for r in reports if r.status == "fail"]
        self.assertEqual(failing, [])
        self.assertGreater(len(reports), len(SUITE_IDS))

    def test_unknown_suite(self):
        """The error lists the valid suite ids."""
        with self.assertRaises(ArgumentError) as ctx:
            run_suite("prop-9.9", flat_kahler(2))
        self.assertIn("prop-2.1", str(ctx.exception))


class TestConformalChart(unittest.TestCase):
    """Checks on the locally conformal Kaehler chart."""

    def setUp(self):
        """Conformal chart, four points, default parameters."""
        self.chart = load_chart(DATA / "conformal_4.json")
        self.config = RunConfig(points=4)

    def test_prop_4_1(self):
        """P = R0 + L for both families."""
        reports = run_suite("prop-4.1", self.chart, self.config)
        self.assertEqual(len(reports), 2)
        for report in reports:
            self.assertEqual(report.status, "pass", report.check_id)

    def test_prop_4_4(self):
        """With lambda3 = lambda4 = 0 the Weyl tensors of P and R0 coincide."""
        [report] = run_suite("prop-4.4", self.chart, self.config)
        self.assertEqual(report.hypothesis, "met")
        self.assertEqual(report.status, "pass")

    def test_prop_4_3_records_printed_residual(self):
        """The derived closed form passes; the printed one is reported alongside."""
        report = check_prop_4_3(q1_family(self.chart, self.config.lambdas), self.config)
        self.assertEqual(report.status, "pass")
        self.assertIn("printed_residual", report.to_dict()["details"][0])

    def test_prop_4_3_needs_q1(self):
        """The Q1 closed form is not applied to other families."""
        with self.assertRaises(ArgumentError):
            check_prop_4_3(q2_family(self.chart, self.config.lambdas), self.config)

    def test_cor_2_3_forced(self):
        """Forcing the hypothesis on a non-Kaehler chart makes the report fail."""
        s = q1_family(self.chart, self.config.lambdas)
        self.assertEqual(check_cor_2_3(s, self.config).status, "skipped")
        self.assertEqual(check_cor_2_3(s, self.config, force_hypothesis=True).status, "fail")

    def test_w1_norm(self):
        """theta(Omega) = (n/2)|nabla0 J|^2 with its hypothesis met."""
        reports = {r.check_id: r for r in check_section_3(self.chart, self.config)}
        report = reports["sec-3/w1-norm"]
        self.assertEqual(report.hypothesis, "met")
        self.assertEqual(report.status, "pass")
        self.assertEqual(reports["sec-3/lichnerowicz"].status, "pass")


class TestAxiomReport(unittest.TestCase):
    """The axioms report on a broken structure."""

    def test_worst_entry_noted(self):
        """Each point names g(J,J)[1][1] with residual 3."""
        report = check_axioms(load_chart(DATA / "broken_j.json"), RunConfig(points=2))
        self.assertEqual(report.status, "fail")
        self.assertEqual(report.max_residual, 3.0)
        self.assertIn("g(J,J)[1][1]", report.details[0].note)

class TestRandomLambdas(unittest.TestCase):
    """Statistical-family checks at seeded random coefficients in [-1, 1]^4."""

    SUITES = ("prop-4.1", "cor-4.1", "prop-4.3", "prop-4.6", "isotropic-omega", "statistical")

    def setUp(self):
        """Conformal chart and twenty coefficient draws."""
        self.chart = load_chart(DATA / "conformal_4.json")
        rng = np.random.default_rng(20)
        self.draws = [[float(v) for v in rng.uniform(-1.0, 1.0, 4)] for _ in range(20)]

    def test_no_failures(self):
        """Every draw passes or skips each family suite."""
        for lambdas in self.draws:
            config = RunConfig(points=2, lambdas=lambdas)
            for suite_id in self.SUITES:
                with self.subTest(suite=suite_id, lambdas=lambdas):
                    failing = [r.check_id for r in run_suite(suite_id, self.chart, config)
                               if r.status == "fail"]
                    self.assertEqual(failing, [])


class TestIsotropicOmegaReport(unittest.TestCase):
    """The gated isotropic-Omega report is built once per run."""

    def setUp(self):
        """Conformal chart, where Omega is not isotropic."""
        self.chart = load_chart(DATA / "conformal_4.json")
        self.config = RunConfig(points=1)

    def test_single_warning_in_run_all(self):
        """run_all logs the skipped isotropic-omega report exactly once."""
        with self.assertLogs('norden-lab.lab.reports', 'WARNING') as cm:
            run_all(self.chart, self.config)
        skipped = [r for r in cm.records if r.getMessage().startswith("isotropic-omega@")]
        self.assertEqual(len(skipped), 1)

    def test_split_reports_agree(self):
        """check_isotropic_omega matches the second report of check_prop_4_6."""
        s = q2_family(self.chart, self.config.lambdas)
        closed_only = check_prop_4_6(s, self.config, isotropic=False)
        both = check_prop_4_6(s, self.config)
        self.assertEqual([r.check_id for r in closed_only], [both[0].check_id])
        alone = check_isotropic_omega(s, self.config)
        self.assertEqual(alone.check_id, both[1].check_id)
        self.assertEqual(alone.hypothesis, "not-met")
        self.assertEqual(alone.status, "skipped")



if __name__ == '__main__':
    unittest.main()
