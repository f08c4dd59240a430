"""
Residual report assembly, writers and schema validation.
"""

import json
import logging
import os
import sys
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

import jsonschema

from core.suite_runner import ExampleResult
from utils.errors import ConfigurationError

logger = logging.getLogger("NullRig")

SCHEMA_VERSION = "1.0"
SCHEMA_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "docs", "report_schema.json")


def build_report(
    results: Sequence[ExampleResult],
    run_config: Dict[str, Any],
    environment: Dict[str, Any],
    timestamp: bool = True,
    adjudication: Optional[List[dict]] = None,
    error: Optional[Dict[str, str]] = None,
) -> Dict[str, Any]:
    """
    Assemble the ResidualReport of a `check` run

    Args:
        results: per-example results in catalog order
        run_config: the RunConfig echo
        environment: conventions and versions
        timestamp: include a generation time (suppressed for byte-identical reruns)
        adjudication: optional sign adjudication table
        error: {"example", "message"} of a numerical failure that stopped the run

    Returns:
        Report dict; overall status is "pass" iff no check failed, "error" after a numerical failure
    """
    checks = [c for r in results for c in r.checks]
    report: Dict[str, Any] = {"schema_version": SCHEMA_VERSION}
    if timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    report["run"] = {"config": run_config, "environment": environment}
    report["examples"] = [r.to_dict() for r in results]
    report["summary"] = {
        "examples": len(results),
        "checks": len(checks),
        "passed": sum(1 for c in checks if c.status == "pass"),
        "failed": sum(1 for c in checks if c.status == "fail"),
        "skipped": sum(1 for c in checks if c.status == "skipped"),
    }
    report["status"] = "fail" if report["summary"]["failed"] else "pass"
    if error is not None:
        report["status"] = "error"
        report["error"] = error
    if adjudication is not None:
        report["adjudication"] = adjudication
    return report


def load_schema() -> Dict[str, Any]:
    path = SCHEMA_PATH
    if not os.path.isfile(path):
        # installed layout: setup.py ships docs/ under the prefix
        path = os.path.join(sys.prefix, "docs", "report_schema.json")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def validate_report(report: Dict[str, Any]) -> None:
    """Raises jsonschema.ValidationError when the report does not match the published schema."""
    jsonschema.validate(instance=report, schema=load_schema())


def _sci(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.2e}"


def format_text(report: Dict[str, Any]) -> str:
    """One line per check with aligned columns."""
    rows = [("example", "check", "status", "max", "mean", "tol", "n", "note")]
    for example in report["examples"]:
        for check in example["checks"]:
            rows.append(
                (
                    example["id"],
                    check["id"],
                    check["status"].upper(),
                    _sci(check["max_residual"]),
                    _sci(check["mean_residual"]),
                    _sci(check["tolerance"]),
                    str(check["samples"]),
                    check.get("skip_reason", ""),
                )
            )
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]) - 1)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) + "  " + row[-1] for row in rows]
    lines = [line.rstrip() for line in lines]
    summary = report["summary"]
    lines.append("")
    lines.append(
        f"{report['status'].upper()}: {summary['passed']} passed, {summary['failed']} failed, "
        f"{summary['skipped']} skipped across {summary['examples']} example(s)"
    )
    if "error" in report:
        lines.append(f"error in {report['error']['example']}: {report['error']['message']}")
    for row in report.get("adjudication", []):
        verdict = "agrees" if row["agrees"] else "DISAGREES"
        lines.append(
            f"sign {row['constant']}: +1 {_sci(row['residual_plus'])}, -1 {_sci(row['residual_minus'])}, "
            f"documented {row['documented']:+d} ({verdict})"
        )
    return "\n".join(lines) + "\n"


def render(report: Dict[str, Any], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "text":
        return format_text(report)
    raise ConfigurationError(f"Unknown report format '{fmt}'")


def write_report(report: Dict[str, Any], path: str, fmt: str = "json") -> str:
    """Write the rendered report, creating parent directories; returns the absolute path."""
    path = os.path.abspath(path)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(render(report, fmt))
    logger.info(f"Report written to {path}")
    return path
