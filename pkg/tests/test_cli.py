"""
Tests for the command-line front end.
"""
import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

from src.charts import dump_file, flat_kahler_file
from src.cli import EXIT_FAILED, EXIT_INPUT, EXIT_OK, main

DATA = Path(__file__).resolve().parent.parent / "data"


def run(*argv):
    """Run main() and capture standard output."""
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv))
    return code, out.getvalue()


class TestValidate(unittest.TestCase):
    """validate: exit codes follow the axioms."""

    def test_flat_passes(self):
        """The flat chart satisfies the axioms."""
        code, out = run("validate", str(DATA / "flat_kahler_4.json"), "--points", "3")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("1 reports: 1 pass, 0 fail, 0 skipped", out)

    def test_broken_fails(self):
        """A broken J fails with the worst entry in the table."""
        code, out = run("validate", str(DATA / "broken_j.json"), "--points", "3")
        self.assertEqual(code, EXIT_FAILED)
        self.assertIn("g(J,J)[1][1]", out)

    def test_missing_file(self):
        """An unreadable file is an input error."""
        code, _ = run("validate", str(DATA / "absent.json"))
        self.assertEqual(code, EXIT_INPUT)


class TestCheck(unittest.TestCase):
    """check: suites, JSON output and argument errors."""

    def test_json_is_deterministic(self):
        """Two runs with the same seed print identical JSON."""
        argv = ("check", str(DATA / "conformal_4.json"), "--suite", "prop-4.1", "--points", "2", "--json")
        first_code, first = run(*argv)
        second_code, second = run(*argv)
        self.assertEqual(first_code, EXIT_OK)
        self.assertEqual(first, second)
        reports = json.loads(first)
        self.assertEqual([r["status"] for r in reports], ["pass", "pass"])
        self.assertEqual(reports[0]["points_tested"], 2)

    def test_unknown_suite(self):
        """An unknown suite id exits with 2 before the file is read."""
        code, _ = run("check", str(DATA / "absent.json"), "--suite", "prop-9.9")
        self.assertEqual(code, EXIT_INPUT)

    def test_bad_lambda(self):
        """--lambda needs four values."""
        code, _ = run("check", str(DATA / "flat_kahler_4.json"), "--suite", "axioms", "--lambda", "1,2")
        self.assertEqual(code, EXIT_INPUT)

    def test_bad_tolerance(self):
        """--tol must be positive."""
        code, _ = run("check", str(DATA / "flat_kahler_4.json"), "--suite", "axioms", "--tol", "-1")
        self.assertEqual(code, EXIT_INPUT)

    def test_all_suites_on_flat_chart(self):
        """--suite all on the flat chart exits 0 with nothing failing."""
        code, out = run("check", str(DATA / "flat_kahler_4.json"), "--suite", "all", "--points", "2")
        self.assertEqual(code, EXIT_OK)
        self.assertIn(" 0 fail,", out)


class TestClassifyAndBuiltin(unittest.TestCase):
    """classify and builtin output."""

    def test_classify_conformal(self):
        """The conformal chart is W1 in aggregate."""
        code, out = run("classify", str(DATA / "conformal_4.json"), "--points", "2", "--json")
        self.assertEqual(code, EXIT_OK)
        table = json.loads(out)
        self.assertEqual(len(table["points"]), 2)
        self.assertTrue(table["aggregate"]["memberships"]["W1"])
        self.assertFalse(table["aggregate"]["memberships"]["W0"])

    def test_builtin_flat(self):
        """builtin prints a loadable manifold file."""
        code, out = run("builtin", "flat-kahler", "--n", "3")
        self.assertEqual(code, EXIT_OK)
        data = json.loads(out)
        self.assertEqual(data["name"], "flat_kahler_6")
        self.assertEqual(data["dimension"], 6)

    def test_builtin_bad_dimension(self):
        """Only n = 2 and n = 3 are provided."""
        code, _ = run("builtin", "flat-kahler", "--n", "4")
        self.assertEqual(code, EXIT_INPUT)


class TestMalformedFile(unittest.TestCase):
    """Expression errors inside a manifold file exit 2 with their location."""

    def setUp(self):
        """A scratch copy of the flat chart."""
        self.tmp = tempfile.TemporaryDirectory()
        self.data = json.loads(dump_file(flat_kahler_file(2)))

    def tearDown(self):
        self.tmp.cleanup()

    def _validate_with(self, i, j, text):
        self.data["g"][i][j] = text
        path = Path(self.tmp.name) / "chart.json"
        path.write_text(json.dumps(self.data), encoding="utf-8")
        with self.assertLogs('norden-lab.cli', 'ERROR') as cm:
            code, _ = run("validate", str(path))
        return code, "\n".join(cm.output)

    def test_incomplete_entry(self):
        """'-1*' at g[3][3] ends early at offset 3."""
        code, log = self._validate_with(3, 3, "-1*")
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("g[3][3]: unexpected end of input at offset 3", log)

    def test_deeply_nested_entry(self):
        """An entry nested 400 parentheses deep is refused, not a crash."""
        code, log = self._validate_with(0, 0, "(" * 400 + "1" + ")" * 400)
        self.assertEqual(code, EXIT_INPUT)
        self.assertIn("g[0][0]: nesting too deep", log)


if __name__ == '__main__':
    unittest.main()
