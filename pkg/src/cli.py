"""
Command-line front end for norden-lab.

Commands:
    validate FILE              axiom residuals at the sample points
    classify FILE              class residuals and memberships per point
    check FILE --suite ID      run one suite (or all) and report
    builtin NAME --n N [--u U] print a builtin manifold file

Exit codes: 0 success, 1 a check failed or the axioms do not hold, 2 input error.
Reports go to standard output; logs go to standard error.
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from src import __version__
from src.charts import BUILTINS, builtin_file, dump_file, load_chart
from src.config import RunConfig, get_settings, parse_lambdas
from src.errors import (
    ArgumentError,
    ExpressionError,
    JetEvaluationError,
    ManifoldFileError,
    NordenAxiomError,
    SingularMetricError,
)
from src.lab import SUITE_IDS, CheckReport, check_axioms, run_all, run_suite, summarize
from src.lab.reports import FAIL
from src.manifold import CLASSES, Chart, classify, sample_points

logger = logging.getLogger('norden-lab.cli')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--points", type=int, default=None, help="number of sample points (default 16)")
    common.add_argument("--seed", type=int, default=None, help="Halton seed (default 42)")
    common.add_argument("--tol", type=float, default=None, help="residual tolerance (default 1e-8)")
    common.add_argument("--lambda", dest="lambdas", default=None,
                        help="four comma separated parameters, e.g. 0.3,-0.7,0.2,0.5")
    common.add_argument("--json", action="store_true", help="machine readable output")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="norden-lab",
                                     description="Numerical verification of almost Norden identities")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", parents=[common], help="check the almost Norden axioms")
    validate.add_argument("file")

    classify_cmd = sub.add_parser("classify", parents=[common], help="class residuals per point")
    classify_cmd.add_argument("file")

    check = sub.add_parser("check", parents=[common], help="run verification suites")
    check.add_argument("file")
    check.add_argument("--suite", default=None, help=f"suite id or 'all' ({', '.join(SUITE_IDS)})")

    builtin = sub.add_parser("builtin", help="print a builtin manifold file")
    builtin.add_argument("name", help=f"one of {', '.join(BUILTINS)}")
    builtin.add_argument("--n", type=int, default=2, help="half dimension (2 or 3)")
    builtin.add_argument("--u", default=None, help="conformal factor expression for conformal-flat")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    lambdas = parse_lambdas(args.lambdas) if args.lambdas else None
    return RunConfig.from_env(points=args.points, seed=args.seed, tol=args.tol, lambdas=lambdas,
                              suite=getattr(args, "suite", None))


# -- output -----------------------------------------------------------------------

def _emit_json(data: Any) -> None:
    print(json.dumps(data, indent=2))


def format_report(report: CheckReport) -> str:
    """One table per report: point index, residual, verdict."""
    lines = [f"{report.check_id}  [{report.status}]  hypothesis={report.hypothesis}  "
             f"max_residual={report.max_residual:.3e}  tolerance={report.tolerance:.1e}"]
    lines.append(f"  {'point':>5}  {'residual':>12}  verdict")
    for index, detail in enumerate(report.details):
        if report.status == "skipped":
            verdict = "holds" if detail.holds else "hypothesis fails"
        else:
            verdict = "ok" if detail.residual <= report.tolerance else "FAIL"
        if detail.note:
            verdict += f" ({detail.note})"
        lines.append(f"  {index:>5}  {detail.residual:>12.3e}  {verdict}")
    return "\n".join(lines)


def _emit_reports(reports: List[CheckReport], as_json: bool) -> None:
    if as_json:
        _emit_json([r.to_dict() for r in reports])
        return
    for report in reports:
        print(format_report(report))
        print()
    counts = summarize(reports)
    print(f"{len(reports)} reports: {counts['pass']} pass, {counts['fail']} fail, {counts['skipped']} skipped")


def _exit_code(reports: List[CheckReport]) -> int:
    return EXIT_FAILED if any(r.status == FAIL for r in reports) else EXIT_OK


# -- commands ------------------------------------------------------------------------

def cmd_validate(chart: Chart, config: RunConfig, as_json: bool) -> int:
    reports = [check_axioms(chart, config)]
    _emit_reports(reports, as_json)
    return _exit_code(reports)


def classification_table(chart: Chart, config: RunConfig) -> Dict[str, Any]:
    """Per-point class residuals and the aggregate over all points."""
    rows = []
    for p in sample_points(chart.domain, config.points, config.seed):
        report = classify(chart, p, config.tol)
        rows.append({"point": list(p), **report.to_dict()})
    residual_keys = [k for k in rows[0] if k.startswith("residual_")]
    aggregate: Dict[str, Any] = {k: max(row[k] for row in rows) for k in residual_keys}
    aggregate["memberships"] = {name: all(row["memberships"][name] for row in rows) for name in CLASSES}
    return {"chart": chart.name, "threshold": config.tol, "points": rows, "aggregate": aggregate}


def cmd_classify(chart: Chart, config: RunConfig, as_json: bool) -> int:
    table = classification_table(chart, config)
    if as_json:
        _emit_json(table)
        return EXIT_OK
    keys = [k for k in table["aggregate"] if k.startswith("residual_")]
    print(f"chart {table['chart']}  threshold {table['threshold']:.1e}")
    print(f"  {'point':>5}  " + "  ".join(f"{k[len('residual_'):]:>12}" for k in keys) + "  classes")
    for index, row in enumerate(table["points"]):
        members = ",".join(name for name in CLASSES if row["memberships"][name]) or "-"
        print(f"  {index:>5}  " + "  ".join(f"{row[k]:>12.3e}" for k in keys) + f"  {members}")
    members = ",".join(name for name in CLASSES if table["aggregate"]["memberships"][name]) or "-"
    print(f"aggregate: {members}")
    return EXIT_OK


def cmd_check(chart: Chart, config: RunConfig, as_json: bool) -> int:
    if config.suite == "all":
        reports = run_all(chart, config)
    else:
        reports = run_suite(config.suite, chart, config)
    _emit_reports(reports, as_json)
    return _exit_code(reports)


def cmd_builtin(name: str, n: int, u: Optional[str]) -> int:
    print(dump_file(builtin_file(name, n, u)))
    return EXIT_OK


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "builtin":
        return cmd_builtin(args.name, args.n, args.u)
    config = _run_config(args)
    if args.command == "check" and config.suite != "all" and config.suite not in SUITE_IDS:
        raise ArgumentError(f"unknown suite '{config.suite}'; valid suites: {', '.join(SUITE_IDS)}")
    chart = load_chart(args.file)
    if args.command == "validate":
        return cmd_validate(chart, config, args.json)
    if args.command == "classify":
        return cmd_classify(chart, config, args.json)
    return cmd_check(chart, config, args.json)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        level = get_settings().log_level
    except ValueError as exc:
        print(f"norden-lab: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    try:
        return _dispatch(args)
    except (ManifoldFileError, ExpressionError, ArgumentError, ValidationError, ValueError) as exc:
        if isinstance(exc, (NordenAxiomError, SingularMetricError)):
            logger.error(f"{exc}")
            return EXIT_FAILED
        logger.error(f"{exc}")
        return EXIT_INPUT
    except JetEvaluationError as exc:
        logger.error(f"evaluation failed: {exc}")
        return EXIT_INPUT
    except Exception as exc:
        logger.error(f"unexpected error: {exc}", exc_info=True)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
