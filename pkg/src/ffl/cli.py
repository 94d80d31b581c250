"""Command-line batch runner: ``ffl --suite theorem6 --n 6 --trials 50``."""
from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigInvalid
from .report import FORMATS, SUITES, SuiteConfig, emit_report
from .suites import run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffl", description="Seeded property suites for quasi-traces on M_n(C).")
    ap.add_argument("--suite", choices=SUITES + ("all",), default="all")
    ap.add_argument("--n", type=int, action="append", dest="n_list", metavar="N",
                    help="matrix dimension; repeatable (default 4)")
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=None,
                    help="override every property tolerance (default: per-property, or $FFL_DEFAULT_TOL)")
    ap.add_argument("--cond-bound", type=float, default=None)
    ap.add_argument("--report", default=None, help="output path; stdout when omitted")
    ap.add_argument("--format", choices=FORMATS, default="json")
    ap.add_argument("--input", default=None, help="fixture matrix file used instead of random inputs")
    ap.add_argument("--replay-seed", type=int, default=None, help="rerun a single trial from its child seed")
    return ap


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    tol = args.tol
    if tol is None and os.environ.get("FFL_DEFAULT_TOL"):
        try:
            tol = float(os.environ["FFL_DEFAULT_TOL"])
        except ValueError as exc:
            raise ConfigInvalid(f"FFL_DEFAULT_TOL is not a number: {exc}") from exc
    return SuiteConfig(
        suite=args.suite,
        n_list=tuple(args.n_list or (4,)),
        trials=args.trials,
        seed=args.seed,
        tol=tol,
        cond_bound=args.cond_bound,
        report_path=args.report,
        format=args.format,
        input_path=args.input,
        replay_seed=args.replay_seed,
    ).validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ConfigInvalid as exc:
        print(f"ffl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_suite(config)
    except (ConfigInvalid, OSError, ValueError) as exc:
        print(f"ffl: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    data = emit_report(report, config.format)
    if config.report_path:
        try:
            with open(config.report_path, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            print(f"ffl: cannot write report: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    agg = report.aggregate
    print(
        f"ffl: {agg['pass_count']}/{agg['record_count']} checks passed, "
        f"max residual {agg['max_residual']:.3e}, {agg['wall_time_ms']:.0f} ms",
        file=sys.stderr,
    )
    for r in report.records:
        if not r["pass"]:
            print(f"ffl: FAIL {r['suite']} n={r['n']} trial={r['trial']} {r['property']} "
                  f"residual={r['residual']} tol={r['tol']} --replay-seed {r['seed']}", file=sys.stderr)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
