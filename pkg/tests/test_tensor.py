"""
Tests for pointwise tensor algebra over a Norden metric.
"""
import unittest

import numpy as np

from src.errors import ArgumentError, NordenAxiomError, UnsupportedDimensionError
from src.tensor import (
    Tensor,
    axiom_residuals,
    contract,
    contract_with_metric,
    is_curvature_like,
    kulkarni_nomizu,
    metric_pair,
    move_index,
    psi_pi_family,
    ricci_scalar,
    weyl,
)


def standard_structure(n):
    """g = diag(I, -I) and J e_i = e_(n+i)."""
    g = np.diag([1.0] * n + [-1.0] * n)
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        J[n + i, i] = 1.0
        J[i, n + i] = -1.0
    return g, J


class TestMetricPair(unittest.TestCase):
    """Validation of g and J at a point."""

    def setUp(self):
        """Flat structure in dimension 4."""
        self.g, self.J = standard_structure(2)
        self.m = metric_pair(self.g, self.J)

    def test_twin_metric(self):
        """g~ = g J is [[0, -I], [-I, 0]] for the standard structure."""
        expected = np.block([[np.zeros((2, 2)), -np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        np.testing.assert_array_equal(self.m.g_tilde.components, expected)
        np.testing.assert_allclose(self.m.g_tilde.components @ self.m.g_tilde_inv.components, np.eye(4))

    def test_twin_of_twin_metric_is_minus_g(self):
        """The twin pair has g~ as metric and -g as its own twin."""
        twin = self.m.twin()
        np.testing.assert_array_equal(twin.g.components, self.m.g_tilde.components)
        np.testing.assert_array_equal(twin.g_tilde.components, -self.g)

    def test_axiom_residuals_flat(self):
        """Every residual vanishes for the standard structure."""
        for item in axiom_residuals(self.g, self.J):
            self.assertEqual(item.residual, 0.0, item.name)

    def test_broken_structure_names_worst_entry(self):
        """J with a stretched column breaks both J^2 = -I and the Norden condition."""
        J = self.J.copy()
        J[2, 0] = 2.0
        residuals = {item.name: item for item in axiom_residuals(self.g, J)}
        self.assertEqual(residuals["complex"].residual, 1.0)
        self.assertEqual(residuals["norden"].residual, 3.0)
        self.assertEqual(residuals["norden"].entry, "g(J,J)[1][1]")
        with self.assertRaises(NordenAxiomError) as ctx:
            metric_pair(self.g, J)
        self.assertGreater(ctx.exception.residual, 0.0)

    def test_odd_dimension_rejected(self):
        """g and J must be square of even size."""
        with self.assertRaises(ArgumentError):
            metric_pair(np.eye(3), np.eye(3))


class TestTensorOps(unittest.TestCase):
    """Index movement, contraction and the Kulkarni-Nomizu product."""

    def setUp(self):
        """Flat metric pair in dimension 4 and a random symmetric form."""
        g, J = standard_structure(2)
        self.m = metric_pair(g, J)
        rng = np.random.default_rng(3)
        a = rng.normal(size=(4, 4))
        self.S = Tensor.of(a + a.T, "ll")

    def test_raise_index(self):
        """Raising (0,0,0,1) with diag(1,1,-1,-1) gives (0,0,0,-1)."""
        v = Tensor.of([0.0, 0.0, 0.0, 1.0], "l")
        raised = move_index(v, 0, "raise", self.m)
        self.assertEqual(raised.code, "u")
        np.testing.assert_array_equal(raised.components, [0.0, 0.0, 0.0, -1.0])
        with self.assertRaises(ArgumentError):
            move_index(raised, 0, "raise", self.m)

    def test_metric_trace_is_dimension(self):
        """g^ij g_ij = 2n."""
        scalar = contract_with_metric(self.m.g, 0, 1, self.m)
        self.assertEqual(scalar.rank, 0)
        self.assertAlmostEqual(float(scalar.components), 4.0, places=14)

    def test_contract_checks_variance(self):
        """Two lower slots cannot be traced without the metric."""
        with self.assertRaises(ArgumentError):
            contract(self.m.g, 0, 1)
        with self.assertRaises(ArgumentError):
            contract(self.m.J, 0, 0)

    def test_variance_code_and_shape(self):
        """Bad variance codes, shapes and mixed sums are rejected."""
        with self.assertRaises(ArgumentError):
            Tensor.of(np.eye(4), "lx")
        with self.assertRaises(ArgumentError):
            Tensor.of(np.zeros((4, 3)), "ll")
        with self.assertRaises(ArgumentError):
            self.m.g + self.m.J

    def test_kulkarni_nomizu_is_curvature_like(self):
        """The product of two symmetric forms is antisymmetric in both pairs and satisfies Bianchi."""
        K = kulkarni_nomizu(self.m.g, self.S)
        self.assertTrue(is_curvature_like(K).holds)
        np.testing.assert_allclose(K.components, -np.swapaxes(K.components, 0, 1), atol=1e-14)

    def test_basic_tensors(self):
        """pi1, pi2 and pi3 are curvature-like."""
        family = psi_pi_family(self.S, self.m)
        for name in ("psi1", "psi2", "pi1", "pi2", "pi3"):
            self.assertTrue(is_curvature_like(getattr(family, name), 1e-12).holds, name)


class TestRicciAndWeyl(unittest.TestCase):
    """Contractions of curvature-like tensors."""

    def setUp(self):
        """pi1 over the flat pair in dimension 4."""
        g, J = standard_structure(2)
        self.m = metric_pair(g, J)
        self.pi1 = psi_pi_family(self.m.g, self.m).pi1

    def test_scalar_curvature_of_pi1(self):
        """tau(pi1) = 2n(2n-1) and rho(pi1) = (2n-1) g."""
        rho, tau = ricci_scalar(self.pi1, self.m)
        self.assertAlmostEqual(tau, 12.0, places=12)
        np.testing.assert_allclose(rho.components, 3.0 * self.m.g.components, atol=1e-13)

    def test_weyl_of_pi1_vanishes(self):
        """pi1 is pure trace, so its Weyl part is zero."""
        W = weyl(self.pi1, self.m)
        np.testing.assert_allclose(W.components, np.zeros((4,) * 4), atol=1e-13)

    def test_weyl_needs_dimension_four(self):
        """Dimension 2 has no Weyl tensor."""
        g, J = standard_structure(1)
        m = metric_pair(g, J)
        with self.assertRaises(UnsupportedDimensionError):
            weyl(Tensor.of(np.zeros((2,) * 4), "llll"), m)


if __name__ == '__main__':
    unittest.main()
