"""
Tests for the chart expression language.
"""
import math
import unittest

import numpy as np

from src.errors import (
    ArgumentError,
    CoordinateRangeError,
    ExponentError,
    ExpressionSyntaxError,
    JetEvaluationError,
    UnknownIdentifierError,
)
from src.expr import (
    MAX_DEPTH,
    BinaryOp,
    Coordinate,
    Negate,
    Power,
    eval_jet,
    free_variables,
    parse,
    to_text,
)


class TestParse(unittest.TestCase):
    """Grammar, precedence and error offsets."""

    def test_tree_shape(self):
        """x1^2*x2 parses to mul(pow(x1, 2), x2)."""
        e = parse("x1^2*x2", 2)
        self.assertEqual(e.root, BinaryOp("*", Power(Coordinate(1), 2), Coordinate(2)))

    def test_unary_minus_binds_below_power(self):
        """-x1^2 is -(x1^2)."""
        e = parse("-x1^2", 2)
        self.assertEqual(e.root, Negate(Power(Coordinate(1), 2)))
        self.assertEqual(eval_jet(e, (3.0, 0.0), 0).value, -9.0)

    def test_coordinate_range(self):
        """exp(2*(x1+x3)) is valid in dimension 4 and out of range in dimension 2."""
        parse("exp(2*(x1+x3))", 4)
        with self.assertRaises(CoordinateRangeError) as ctx:
            parse("exp(2*(x1+x3))", 2)
        self.assertEqual(ctx.exception.offset, 10)

    def test_unclosed_parenthesis(self):
        """sin(x1 reports a syntax error at offset 6."""
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("sin(x1", 2)
        self.assertEqual(ctx.exception.offset, 6)
        self.assertIn("offset 6", str(ctx.exception))

    def test_exponent_must_be_integer(self):
        """Non-integer and non-literal exponents are rejected."""
        with self.assertRaises(ExponentError):
            parse("x1^2.5", 2)
        with self.assertRaises(ExponentError):
            parse("x1^x2", 2)
        self.assertEqual(parse("x1^-2", 2).root, Power(Coordinate(1), -2))

    def test_unknown_identifier(self):
        """Unknown names report their offset."""
        with self.assertRaises(UnknownIdentifierError) as ctx:
            parse("1 + foo(x1)", 2)
        self.assertEqual(ctx.exception.offset, 4)

    def test_bad_character(self):
        """Characters outside the grammar are syntax errors."""
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("x1 $ x2", 2)
        self.assertEqual(ctx.exception.offset, 3)

    def test_nesting_limit(self):
        """Nesting past MAX_DEPTH is a syntax error with an offset, not a crash."""
        self.assertEqual(parse("(" * 50 + "x1" + ")" * 50, 2).root, Coordinate(1))
        self.assertEqual(parse("-" * 50 + "x1", 2).to_text(), "-" * 50 + "x1")
        for text in ("(" * 400 + "x1" + ")" * 400, "-" * 2000 + "x1"):
            with self.assertRaises(ExpressionSyntaxError) as ctx:
                parse(text, 2)
            self.assertEqual(ctx.exception.offset, MAX_DEPTH)
            self.assertIn("nesting too deep", str(ctx.exception))
        with self.assertRaises(ExpressionSyntaxError):
            parse("sin(" * 300 + "x1" + ")" * 300, 2)

    def test_bad_character_is_decoded(self):
        """Non-ASCII characters are shown as text at their byte offset."""
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("x1 é x2", 2)
        self.assertEqual(ctx.exception.offset, 3)
        self.assertIn("unexpected character 'é'", str(ctx.exception))
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("éé+x₁", 2)
        self.assertEqual(ctx.exception.offset, 0)
        with self.assertRaises(ExpressionSyntaxError) as ctx:
            parse("x1+x₁", 2)
        self.assertEqual(ctx.exception.offset, 4)
        self.assertIn("'₁'", str(ctx.exception))

    def test_coordinate_leading_zero(self):
        """x01 is not another spelling of x1; x0 is out of range."""
        with self.assertRaises(UnknownIdentifierError) as ctx:
            parse("2*x01", 2)
        self.assertEqual(ctx.exception.offset, 2)
        with self.assertRaises(CoordinateRangeError):
            parse("x0", 2)
        self.assertEqual(parse("x10", 10).root, Coordinate(10))

    def test_print_parse_fixed_point(self):
        """Parsing the canonical text yields the same tree."""
        for text in ("x1-(x2-x3)", "(x1+x2)*x3", "-(x1+2.5)^3", "x1/(x2*x3)", "exp(-x1)*sin(pi*x2)",
                     "2*(x1+x3)", "1-x1^-2", "(-x1)^2"):
            e = parse(text, 3)
            again = parse(to_text(e), 3)
            self.assertEqual(again, e, text)
            self.assertEqual(to_text(again), to_text(e))

    def test_free_variables(self):
        """Exactly the coordinates that occur."""
        self.assertEqual(free_variables(parse("x1+x1*x2", 2)), frozenset({1, 2}))
        self.assertEqual(free_variables(parse("3.5", 2)), frozenset())
        self.assertEqual(free_variables(parse("sin(x4)", 4)), frozenset({4}))


class TestEvaluate(unittest.TestCase):
    """Jet evaluation of parsed expressions."""

    def test_constant(self):
        """A literal has zero derivatives."""
        jet = eval_jet(parse("1", 4), (0.1, 0.2, 0.3, 0.4), 2)
        self.assertEqual(jet.value, 1.0)
        np.testing.assert_array_equal(jet.hess, np.zeros((4, 4)))

    def test_polynomial(self):
        """x1^2*x2 at (2, 3)."""
        jet = eval_jet(parse("x1^2*x2", 2), (2.0, 3.0), 2)
        self.assertEqual(jet.value, 12.0)
        np.testing.assert_allclose(jet.grad, [12.0, 4.0])
        np.testing.assert_allclose(jet.hess, [[6.0, 4.0], [4.0, 0.0]])

    def test_exponential_against_finite_differences(self):
        """exp(2*x1) at (0.3, 0) agrees with central differences."""
        e = parse("exp(2*x1)", 2)
        jet = eval_jet(e, (0.3, 0.0), 2)
        h = 1e-4
        f = lambda x: eval_jet(e, (x, 0.0), 0).value
        self.assertAlmostEqual(jet.grad[0], (f(0.3 + h) - f(0.3 - h)) / (2 * h), delta=1e-4 * jet.grad[0])
        second = (f(0.3 + h) - 2 * f(0.3) + f(0.3 - h)) / (h * h)
        self.assertAlmostEqual(jet.hess[0, 0], second, delta=1e-4 * jet.hess[0, 0])
        self.assertAlmostEqual(jet.value, math.exp(0.6), places=14)

    def test_domain_error_carries_span(self):
        """A failing sub-expression is named by its byte range."""
        with self.assertRaises(JetEvaluationError) as ctx:
            eval_jet(parse("1 + log(x1-1)", 2), (1.0, 0.5), 1)
        self.assertEqual(ctx.exception.span, (4, 13))
        self.assertIn("log(x1-1)", str(ctx.exception))

    def test_division_by_zero(self):
        """Division by zero is a structured error, not a crash."""
        with self.assertRaises(JetEvaluationError) as ctx:
            eval_jet(parse("x1/(x2-x2)", 2), (1.0, 2.0), 1)
        self.assertEqual(ctx.exception.operation, "div")

    def test_point_length(self):
        """The point must match the expression dimension."""
        with self.assertRaises(ArgumentError):
            eval_jet(parse("x1", 2), (1.0,), 1)

_LEAVES = ("x1", "x2", "x3", "0.5", "1.5", "pi/4")


def smooth_expression(rng, depth=3):
    """Random expression that is smooth and well scaled on [0.2, 0.8]^3."""
    if depth == 0 or rng.random() < 0.2:
        return str(rng.choice(_LEAVES))
    a = smooth_expression(rng, depth - 1)
    kind = int(rng.integers(10))
    if kind < 3:
        b = smooth_expression(rng, depth - 1)
        return f"({a}){'+-*'[kind]}({b})"
    if kind == 3:
        return f"({a})/(2+cos({smooth_expression(rng, depth - 1)}))"
    if kind == 4:
        return f"{rng.choice(('sin', 'cos', 'tanh'))}({a})"
    if kind == 5:
        return f"exp(sin({a}))"
    if kind == 6:
        return f"log(2+sin({a}))"
    if kind == 7:
        return f"sqrt(1.5+cos({a}))"
    if kind == 8:
        return f"({a})^2"
    return f"{rng.choice(('sinh', 'cosh', 'tan'))}(0.5*sin({a}))"


def any_expression(rng, depth=4):
    """Random well-formed expression with no guard on the function domains."""
    if depth == 0 or rng.random() < 0.25:
        return str(rng.choice(("x1", "x2", "x3", "0", "1", "2.5", "pi", "e", "1e-300", "1e300")))
    a = any_expression(rng, depth - 1)
    kind = int(rng.integers(6))
    if kind < 4:
        return f"({a}){'+-*/'[kind]}({any_expression(rng, depth - 1)})"
    if kind == 4:
        return f"{rng.choice(('sin', 'cos', 'tan', 'exp', 'log', 'sqrt', 'sinh', 'cosh', 'tanh'))}({a})"
    return f"({a})^{int(rng.integers(-3, 4))}"


def _differences(e, point, h=1e-5):
    """Gradient from values and Hessian from jet gradients, both by central differences."""
    dim = len(point)
    grad = np.zeros(dim)
    hess = np.zeros((dim, dim))
    for j in range(dim):
        plus, minus = list(point), list(point)
        plus[j] += h
        minus[j] -= h
        grad[j] = (eval_jet(e, plus, 0).value - eval_jet(e, minus, 0).value) / (2 * h)
        hess[:, j] = (eval_jet(e, plus, 1).grad - eval_jet(e, minus, 1).grad) / (2 * h)
    return grad, hess


class TestRandomExpressions(unittest.TestCase):
    """Seeded random expressions: derivative accuracy and structured failure."""

    def test_against_finite_differences(self):
        """Gradient and Hessian of 1000 expressions agree with central differences."""
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            text = smooth_expression(rng)
            point = tuple(float(x) for x in rng.uniform(0.2, 0.8, 3))
            e = parse(text, 3)
            jet = eval_jet(e, point, 2)
            grad, hess = _differences(e, point)
            with self.subTest(text=text, point=point):
                scale = max(1.0, float(np.max(np.abs(jet.grad))))
                np.testing.assert_allclose(jet.grad, grad, rtol=1e-4, atol=1e-7 * scale)
                scale = max(1.0, float(np.max(np.abs(jet.hess))))
                np.testing.assert_allclose(jet.hess, hess, rtol=1e-4, atol=1e-7 * scale)

    def test_evaluation_never_crashes(self):
        """10^4 expressions give a finite jet or a JetEvaluationError with a span."""
        rng = np.random.default_rng(10000)
        outcomes = {"jet": 0, "error": 0}
        with np.errstate(all="ignore"):
            for _ in range(10000):
                text = any_expression(rng)
                point = tuple(float(x) for x in rng.choice((0.0, -1.0, 0.5, 2.0, 1e3), 3))
                e = parse(text, 3)
                try:
                    jet = eval_jet(e, point, 2)
                except JetEvaluationError as exc:
                    outcomes["error"] += 1
                    self.assertIsNotNone(exc.span, text)
                    start, end = exc.span
                    self.assertTrue(0 <= start <= end <= len(text.encode("utf-8")), text)
                else:
                    outcomes["jet"] += 1
                    self.assertTrue(jet.is_finite(), text)
        self.assertGreater(outcomes["jet"], 0)
        self.assertGreater(outcomes["error"], 0)



if __name__ == '__main__':
    unittest.main()
