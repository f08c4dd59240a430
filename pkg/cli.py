#!/usr/bin/env python3
import os
import sys
import json
import argparse
import logging
from typing import Any, Dict, List, Optional

import jsonschema

from core.catalog import CatalogEntry, catalog, get_entry
from core.induced import induce
from core.suite_runner import SuiteRunner, adjudicate_catalog, sample_points
from integrations.config_file import export_entry, load_config_file, merge_run_config
from integrations.report import build_report, render, validate_report, write_report
from utils import config
from utils.errors import ConfigurationError, NullRigError, NumericalError


def _tolerance_override(text: str):
    """ID=VALUE, where ID is a check id, a suite name or "all"."""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected ID=VALUE, got '{text}'")
    try:
        tol = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance '{value}' is not a number")
    if not tol > 0:
        raise argparse.ArgumentTypeError(f"tolerance for '{key}' must be positive")
    return key, tol


def parse_args(argv: Optional[List[str]] = None):
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="NullRig - Verify the induced geometry of r-null submanifolds numerically"
    )

    # Create subparsers for different modes
    subparsers = parser.add_subparsers(dest="mode", help="Operation mode")

    # Common arguments
    common_parser = argparse.ArgumentParser(add_help=False)
    common_parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable verbose output"
    )
    common_parser.add_argument(
        "-d", "--debug",
        action="store_true",
        help="Enable debug mode with detailed logging"
    )
    common_parser.add_argument(
        "-f", "--format",
        choices=config.FORMATS,
        default=None,
        help="Output format (default: text)"
    )
    common_parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"Sampling seed (default: {config.DEFAULT_SEED})"
    )

    subparsers.add_parser("list", help="List the catalog examples", parents=[common_parser])

    check_parser = subparsers.add_parser("check", help="Run identity checks on catalog examples", parents=[common_parser])
    check_parser.add_argument(
        "-e", "--example",
        default=None,
        help="Catalog id or 'all' (default: all supported examples)"
    )
    check_parser.add_argument(
        "-s", "--suite",
        choices=config.SUITES,
        default=None,
        help="Check suite (default: all)"
    )
    check_parser.add_argument(
        "-t", "--tolerance",
        type=_tolerance_override,
        action="append",
        default=None,
        metavar="ID=VALUE",
        help="Tolerance override by check id, suite name or 'all' (repeatable)"
    )
    check_parser.add_argument(
        "-n", "--samples",
        type=int,
        default=None,
        help=f"Sample points per example (default: {config.DEFAULT_SAMPLES})"
    )
    check_parser.add_argument(
        "--sign",
        type=int,
        choices=(1, -1),
        default=None,
        help="Sign convention of the rigged metric (default: +1)"
    )
    check_parser.add_argument(
        "--rigging",
        choices=config.RIGGING_MODES,
        default=None,
        help="Use the analytic catalog riggings or always construct one (default: catalog)"
    )
    check_parser.add_argument(
        "-o", "--report",
        dest="report_path",
        default=None,
        help="Report file path (default: $NULLRIG_REPORT_DIR, else stdout)"
    )
    check_parser.add_argument(
        "-w", "--workers",
        type=int,
        default=None,
        help=f"Maximum number of worker threads (default: {config.MAX_WORKERS})"
    )
    check_parser.add_argument(
        "-c", "--config",
        default=None,
        help="Run configuration file (KEY=VALUE); flags win over file values"
    )
    check_parser.add_argument(
        "--no-timestamp",
        dest="timestamp",
        action="store_const",
        const=False,
        default=None,
        help="Leave the generation time out of the report"
    )
    check_parser.add_argument(
        "--adjudicate",
        action="store_true",
        help="Attach the sign adjudication table to the report"
    )
    check_parser.add_argument(
        "-q", "--quiet",
        action="store_true",
        help="Disable the progress bar"
    )

    describe_parser = subparsers.add_parser("describe", help="Describe one example at its first sample point", parents=[common_parser])
    describe_parser.add_argument("example", help="Catalog id")
    describe_parser.add_argument("--sign", type=int, choices=(1, -1), default=config.DEFAULT_SIGN_CONVENTION)
    describe_parser.add_argument("--rigging", choices=config.RIGGING_MODES, default="catalog")

    adjudicate_parser = subparsers.add_parser("adjudicate", help="Evaluate the documented sign constants at both values", parents=[common_parser])
    adjudicate_parser.add_argument(
        "-n", "--samples",
        type=int,
        default=10,
        help="Sample points per example (default: 10)"
    )

    export_parser = subparsers.add_parser("export", help="Write a catalog example as a run configuration file", parents=[common_parser])
    export_parser.add_argument("example", help="Catalog id")
    export_parser.add_argument("-o", "--output", help="Output file path (default: stdout)")

    return parser.parse_args(argv)


def write_output(text: str, output_path: str = None):
    """Write text to output file or stdout"""
    if output_path:
        with open(output_path, "w", encoding="utf-8") as f:
            f.write(text)
        print(f"Results written to {output_path}")
    else:
        sys.stdout.write(text)


def _json(value: Any) -> str:
    return json.dumps(value, indent=2, default=lambda o: o.tolist() if hasattr(o, "tolist") else str(o)) + "\n"


def setup_logging(debug=False, verbose=False):
    """Set log levels: WARNING by default, INFO with --verbose, DEBUG with --debug"""
    logging.getLogger().setLevel(logging.WARNING)

    if debug:
        logging.getLogger("NullRig").setLevel(logging.DEBUG)
    elif verbose:
        logging.getLogger("NullRig").setLevel(logging.INFO)
    else:
        logging.getLogger("NullRig").setLevel(logging.WARNING)


def _select_entries(example: str, custom: Optional[CatalogEntry]) -> List[CatalogEntry]:
    if custom is not None:
        if example != custom.id:
            raise ConfigurationError(
                f"Config file defines the geometry '{custom.id}' but --example selects '{example}'; drop one of them"
            )
        return [custom]
    if example == "all":
        return [entry for entry in catalog() if entry.supported]
    return [get_entry(example)]


def _report_destination(report_path: Optional[str], fmt: str) -> Optional[str]:
    if report_path:
        return report_path
    if config.REPORT_DIR:
        return os.path.join(config.REPORT_DIR, f"nullrig-report.{'json' if fmt == 'json' else 'txt'}")
    return None


def run_check(args) -> int:
    logger = logging.getLogger("NullRig")

    file_values: Dict[str, object] = {}
    custom = None
    if args.config:
        file_values, custom = load_config_file(args.config)
    flag_values = {
        "example": args.example,
        "suite": args.suite,
        "tolerance": dict(args.tolerance) if args.tolerance else None,
        "samples": args.samples,
        "seed": args.seed,
        "sign_convention": args.sign,
        "rigging": args.rigging,
        "report_path": args.report_path,
        "format": args.format,
        "workers": args.workers,
        "timestamp": args.timestamp,
    }
    run_config = merge_run_config(file_values, flag_values)
    entries = _select_entries(run_config.example, custom)

    if args.verbose or args.debug:
        logger.info(f"Configuration:")
        for key, value in run_config.to_dict().items():
            logger.info(f"  - {key}: {value}")

    runner = SuiteRunner(
        suite=run_config.suite,
        tolerance=run_config.tolerance,
        samples=run_config.samples,
        seed=run_config.seed,
        sign=run_config.sign_convention,
        rigging=run_config.rigging,
        max_workers=run_config.workers,
        quiet=args.quiet,
    )

    results = []
    error = None
    for entry in entries:
        try:
            results.append(runner.run_example(entry))
        except NumericalError as e:
            logger.error(f"Numerical failure on {entry.id}: {e}")
            error = {"example": entry.id, "message": str(e)}
            break

    adjudication = None
    if args.adjudicate and error is None:
        adjudication = adjudicate_catalog(entries, seed=run_config.seed, sign=run_config.sign_convention)

    report = build_report(
        results,
        run_config.to_dict(),
        runner.environment(),
        timestamp=run_config.timestamp,
        adjudication=adjudication,
        error=error,
    )
    validate_report(report)

    destination = _report_destination(run_config.report_path, run_config.format)
    if destination:
        path = write_report(report, destination, run_config.format)
        print(f"{report['status'].upper()}: report written to {path}")
    else:
        sys.stdout.write(render(report, run_config.format))

    if error is not None:
        return 3
    return 0 if report["status"] == "pass" else 1


def run_list(args) -> int:
    entries = catalog()
    if args.format == "json":
        write_output(_json([entry.summary() for entry in entries]))
        return 0
    width = max(len(entry.id) for entry in entries)
    cls_width = max(len(entry.classification) for entry in entries)
    lines = [f"{entry.id.ljust(width)}  {entry.classification.ljust(cls_width)}  {entry.description}" for entry in entries]
    write_output("\n".join(lines) + "\n")
    return 0


def run_describe(args) -> int:
    entry = get_entry(args.example)
    out: Dict[str, Any] = entry.summary()
    if entry.supported:
        seed = config.DEFAULT_SEED if args.seed is None else args.seed
        u = sample_points(entry, 1, seed)[0]
        geo = induce(entry.setup(args.rigging, args.sign), u)
        out["sign_convention"] = args.sign
        out["rigging_mode"] = args.rigging
        out["reference"] = geo.values()
    else:
        out["computed_classification"] = entry.computed_classification()
    write_output(_json(out))
    return 0


def run_adjudicate(args) -> int:
    seed = config.DEFAULT_SEED if args.seed is None else args.seed
    rows = adjudicate_catalog(catalog(), samples=args.samples, seed=seed)
    if args.format == "json":
        write_output(_json(rows))
    else:
        lines = []
        for row in rows:
            verdict = "agrees" if row["agrees"] else "DISAGREES"
            lines.append(
                f"{row['constant']}: +1 {row['residual_plus']:.2e}, -1 {row['residual_minus']:.2e}, "
                f"documented {row['documented']:+d}, preferred {row['preferred']:+d} ({verdict}, {row['points']} points)"
            )
        write_output("\n".join(lines) + "\n")
    return 0 if all(row["agrees"] for row in rows) else 1


def run_export(args) -> int:
    write_output(export_entry(get_entry(args.example)), args.output)
    return 0


COMMANDS = {
    "list": run_list,
    "check": run_check,
    "describe": run_describe,
    "adjudicate": run_adjudicate,
    "export": run_export,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = parse_args(argv)

    setup_logging(debug=getattr(args, "debug", False), verbose=getattr(args, "verbose", False))

    logger = logging.getLogger("NullRig")

    if args.mode not in COMMANDS:
        print("Error: No mode specified", file=sys.stderr)
        print("Use one of: " + ", ".join(COMMANDS), file=sys.stderr)
        return ConfigurationError.exit_code

    try:
        return COMMANDS[args.mode](args)
    except NullRigError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except jsonschema.ValidationError as e:
        logger.error(f"Report does not match its schema: {e.message}")
        print(f"Error: report does not match its schema: {e.message}", file=sys.stderr)
        return NumericalError.exit_code


if __name__ == "__main__":
    sys.exit(main())
