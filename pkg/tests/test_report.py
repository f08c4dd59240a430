import json

import jsonschema
import pytest

from core.suite_runner import SuiteRunner, run_suite
from integrations.report import SCHEMA_VERSION, build_report, format_text, render, validate_report, write_report
from utils.config import RunConfig
from utils.errors import ConfigurationError


@pytest.fixture(scope="module")
def results():
    return [run_suite("null-hyperplane", suite="metric", samples=2, quiet=True)]


def make_report(results, **kwargs):
    return build_report(results, RunConfig(samples=2).to_dict(), SuiteRunner(quiet=True).environment(), **kwargs)


def test_report_matches_schema(results):
    report = make_report(results)
    validate_report(report)
    assert report["schema_version"] == SCHEMA_VERSION
    assert report["status"] == "pass"
    assert report["summary"]["examples"] == 1
    assert report["summary"]["checks"] == len(results[0].checks)
    assert "generated_at" in report


def test_report_without_timestamp_is_reproducible(results):
    first = render(make_report(results, timestamp=False))
    second = render(make_report(results, timestamp=False))
    assert first == second
    assert "generated_at" not in json.loads(first)


def test_error_report(results):
    report = make_report(results, error={"example": "light-cone", "message": "pivot lost"})
    validate_report(report)
    assert report["status"] == "error"
    assert "error in light-cone: pivot lost" in format_text(report)


def test_adjudication_table_is_attached(results):
    row = {
        "constant": "lemma-3.3:tau",
        "documented": 1,
        "residual_plus": 0.0,
        "residual_minus": 0.0,
        "preferred": 1,
        "agrees": True,
        "points": 2,
    }
    report = make_report(results, adjudication=[row])
    validate_report(report)
    assert "sign lemma-3.3:tau" in format_text(report)


def test_broken_report_is_rejected(results):
    report = make_report(results)
    report["status"] = "maybe"
    with pytest.raises(jsonschema.ValidationError):
        validate_report(report)
    del report["status"]
    with pytest.raises(jsonschema.ValidationError):
        validate_report(report)


def test_text_format(results):
    text = format_text(make_report(results))
    lines = text.splitlines()
    assert lines[0].split() == ["example", "check", "status", "max", "mean", "tol", "n", "note"]
    assert any(line.startswith("null-hyperplane") and "lemma-3.3" in line for line in lines)
    assert lines[-1].startswith("PASS:")


def test_write_report_creates_directories(tmp_path, results):
    path = write_report(make_report(results), str(tmp_path / "nested" / "report.json"))
    with open(path) as f:
        assert json.load(f)["status"] == "pass"


def test_unknown_format(results):
    with pytest.raises(ConfigurationError):
        render(make_report(results), "xml")
