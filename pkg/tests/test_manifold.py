"""
Tests for chart-level structure: fundamental tensor, Lie forms, curvature and classes.
"""
import unittest
from pathlib import Path

import numpy as np

from src.charts import conformal_flat, flat_kahler, load_chart
from src.errors import ArgumentError, NordenAxiomError, OrderBudgetError
from src.manifold import (
    CLASSES,
    chart_point,
    check_axioms,
    classify,
    curvature_R0,
    levi_civita,
    lie_forms,
    nabla0J_norms,
    nijenhuis,
    sample_points,
    tensor_F,
)

DATA = Path(__file__).resolve().parent.parent / "data"


class TestFlatKahler(unittest.TestCase):
    """The flat chart is Kaehler: every derived quantity vanishes."""

    def setUp(self):
        """Flat chart in dimension 4 and a few sample points."""
        self.chart = flat_kahler(2)
        self.points = sample_points(self.chart.domain, 4, 42)

    def test_fundamental_tensor_vanishes(self):
        """F, theta and R0 are zero."""
        for p in self.points:
            self.assertLessEqual(tensor_F(self.chart, p).norm(), 1e-12)
            self.assertLessEqual(lie_forms(self.chart, p).theta.norm(), 1e-12)
            self.assertLessEqual(curvature_R0(self.chart, p).norm(), 1e-12)

    def test_every_class_contains_w0(self):
        """W0 lies in every class."""
        report = classify(self.chart, self.points[0])
        for name in CLASSES:
            self.assertTrue(report.member(name), name)

    def test_twin_metric(self):
        """g~ = [[0, -I], [-I, 0]]."""
        point = chart_point(self.chart, self.points[0])
        expected = np.block([[np.zeros((2, 2)), -np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        np.testing.assert_allclose(point.g_tilde.value, expected, atol=1e-15)

    def test_point_length(self):
        """Points must have one coordinate per dimension."""
        with self.assertRaises(ArgumentError):
            chart_point(self.chart, (0.1, 0.2))


class TestConformalCharts(unittest.TestCase):
    """g = exp(2u) diag(I, -I) is locally conformal Kaehler (class W1)."""

    def setUp(self):
        """The conformal chart u = x1*x2 and its isotropic variant u = x1+x4."""
        self.chart = load_chart(DATA / "conformal_4.json")
        self.isotropic = load_chart(DATA / "conformal_isotropic_4.json")
        self.points = sample_points(self.chart.domain, 4, 42)

    def test_class_w1(self):
        """F is its own W1 part but does not vanish."""
        for p in self.points:
            report = classify(self.chart, p)
            self.assertTrue(report.member("W1"))
            self.assertFalse(report.member("W0"))
            self.assertLess(report.residual_W1, 1e-8)

    def test_w1_norm_identity(self):
        """theta(Omega) = (n/2) |nabla0 J|^2 in class W1."""
        for p in self.points:
            point = chart_point(self.chart, p)
            theta_omega = float(point.theta.value @ point.omega.value)
            norms = nabla0J_norms(self.chart, p)
            self.assertAlmostEqual(theta_omega, self.chart.n / 2 * norms.norm_sq,
                                   delta=1e-8 * max(1.0, abs(theta_omega)))

    def test_isotropic_lie_vector(self):
        """u = x1 + x4 gives theta(Omega) = theta(J Omega) = 0 with theta != 0."""
        for p in self.points:
            point = chart_point(self.isotropic, p)
            self.assertGreater(float(np.max(np.abs(point.theta.value))), 1e-3)
            self.assertAlmostEqual(float(point.theta.value @ point.omega.value), 0.0, delta=1e-10)
            self.assertAlmostEqual(float(point.theta.value @ point.J_omega.value), 0.0, delta=1e-10)

    def test_builtin_matches_file(self):
        """The builtin conformal chart reproduces the file's fundamental tensor."""
        builtin = conformal_flat(2, "x1*x2")
        p = self.points[1]
        np.testing.assert_allclose(tensor_F(builtin, p).components, tensor_F(self.chart, p).components,
                                   atol=1e-13)


class TestTwistedChart(unittest.TestCase):
    """A non-integrable almost Norden structure."""

    def setUp(self):
        """The twisted chart and a point inside its domain."""
        self.chart = load_chart(DATA / "twisted_4.json")
        self.p = sample_points(self.chart.domain, 1, 42)[0]

    def test_nijenhuis_nonzero(self):
        """J depends on the coordinates in a non-integrable way."""
        self.assertGreater(nijenhuis(self.chart, self.p).norm(), 1e-3)

    def test_axioms_hold(self):
        """The axioms hold even though J is not integrable."""
        report = check_axioms(self.chart, self.p)
        self.assertLess(report.worst.residual, 1e-12)

    def test_levi_civita_order_budget(self):
        """Christoffel jets beyond order 2 are refused."""
        with self.assertRaises(OrderBudgetError):
            levi_civita(self.chart, self.p, order=3)
        with self.assertRaises(ArgumentError):
            levi_civita(self.chart, self.p, which="h")


class TestAxiomsAndSampling(unittest.TestCase):
    """Axiom residuals and deterministic sample points."""

    def setUp(self):
        """The broken chart, whose J fails the axioms."""
        self.broken = load_chart(DATA / "broken_j.json")
        self.p = (0.1, 0.2, 0.3, 0.4)

    def test_worst_entry(self):
        """The Norden condition fails worst, at g(J,J)[1][1] with residual 3."""
        report = check_axioms(self.broken, self.p)
        self.assertEqual(report.worst.name, "norden")
        self.assertEqual(report.worst.entry, "g(J,J)[1][1]")
        self.assertEqual(report.worst.residual, 3.0)

    def test_structure_refused(self):
        """Building the structure at a point raises the axiom error."""
        with self.assertRaises(NordenAxiomError):
            chart_point(self.broken, self.p)

    def test_sample_points_deterministic(self):
        """Same domain, count and seed give the same points, all inside the box."""
        domain = [(0.2, 0.8)] * 4
        first = sample_points(domain, 16, 42)
        self.assertEqual(first, sample_points(domain, 16, 42))
        self.assertNotEqual(first, sample_points(domain, 16, 7))
        self.assertEqual(len(first), 16)
        for p in first:
            self.assertTrue(all(0.2 <= x <= 0.8 for x in p))

    def test_sample_points_arguments(self):
        """Count must be positive and seed non-negative."""
        with self.assertRaises(ArgumentError):
            sample_points([(0.0, 1.0)] * 2, 0, 42)
        with self.assertRaises(ArgumentError):
            sample_points([(0.0, 1.0)] * 2, 4, -1)


if __name__ == '__main__':
    unittest.main()
