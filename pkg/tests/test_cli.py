import json

import pytest

import cli
from core.suite_runner import SuiteRunner
from utils import config
from utils.errors import NumericalError


@pytest.fixture(autouse=True)
def no_report_dir(monkeypatch):
    monkeypatch.setattr(config, "REPORT_DIR", None)


def test_no_mode(capsys):
    assert cli.main([]) == 2
    assert "No mode specified" in capsys.readouterr().err


def test_list(capsys):
    assert cli.main(["list"]) == 0
    out = capsys.readouterr().out
    assert "light-cone" in out and "totally-null" in out


def test_list_json(capsys):
    assert cli.main(["list", "--format", "json"]) == 0
    ids = [entry["id"] for entry in json.loads(capsys.readouterr().out)]
    assert "nullline-x-sphere" in ids


def test_check_passes(tmp_path):
    report_path = tmp_path / "report.json"
    code = cli.main(["check", "-e", "null-hyperplane", "-n", "2", "-q", "-f", "json", "-o", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["schema_version"] == "1.0"
    assert report["examples"][0]["id"] == "null-hyperplane"
    assert report["run"]["config"]["samples"] == 2


def test_check_to_stdout_in_text(capsys):
    assert cli.main(["check", "-e", "light-cone", "-s", "metric", "-n", "2", "-q"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("PASS:")


def test_report_dir_default(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(config, "REPORT_DIR", str(tmp_path))
    assert cli.main(["check", "-e", "null-hyperplane", "-s", "frames", "-n", "1", "-q", "-f", "json"]) == 0
    assert (tmp_path / "nullrig-report.json").is_file()
    assert "report written to" in capsys.readouterr().out


def test_unsupported_example_exit_code(capsys):
    assert cli.main(["check", "-e", "totally-null-plane", "-n", "1", "-q"]) == 2
    assert "totally-null" in capsys.readouterr().err


def test_unknown_example_exit_code():
    assert cli.main(["check", "-e", "moebius", "-n", "1", "-q"]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--tolerance", "lemma-3.3"],
        ["check", "--tolerance", "lemma-3.3=-1"],
        ["check", "--sign", "2"],
        ["check", "--suite", "everything"],
        ["check", "--format", "xml"],
    ],
)
def test_malformed_flags(argv):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_unknown_tolerance_key_exit_code(capsys):
    assert cli.main(["check", "-e", "light-cone", "-t", "lemma-9.9=1e-3", "-n", "1", "-q"]) == 2
    assert "lemma-9.9" in capsys.readouterr().err


def test_numerical_failure_writes_error_report(tmp_path, monkeypatch):
    def fail(self, entry):
        raise NumericalError("pivot block became singular")

    monkeypatch.setattr(SuiteRunner, "run_example", fail)
    report_path = tmp_path / "report.json"
    assert cli.main(["check", "-e", "light-cone", "-q", "-f", "json", "-o", str(report_path)]) == 3
    report = json.loads(report_path.read_text())
    assert report["status"] == "error"
    assert report["error"] == {"example": "light-cone", "message": "pivot block became singular"}


def test_rerun_without_timestamp_is_byte_identical(tmp_path):
    report_path = tmp_path / "report.json"
    argv = ["check", "-e", "r1-lightlike-surface", "-n", "2", "-q", "-f", "json", "--no-timestamp", "-o", str(report_path)]
    assert cli.main(argv) == 0
    first = report_path.read_bytes()
    assert cli.main(argv) == 0
    assert report_path.read_bytes() == first


def test_describe(capsys):
    assert cli.main(["describe", "light-cone"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["classification"] == "coisotropic"
    assert out["reference"]["nullity"] == 1
    assert out["reference"]["rigging_source"] == "catalog"


def test_describe_rejected_entry(capsys):
    assert cli.main(["describe", "isotropic-plane"]) == 0
    assert json.loads(capsys.readouterr().out)["computed_classification"] == "isotropic"


def test_export_then_check_config(tmp_path):
    config_path = tmp_path / "light-cone.env"
    assert cli.main(["export", "light-cone", "-o", str(config_path)]) == 0
    assert "immersion.entry=light-cone" in config_path.read_text()
    report_path = tmp_path / "report.json"
    code = cli.main(["check", "-c", str(config_path), "-n", "2", "-q", "-f", "json", "-o", str(report_path)])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["examples"][0]["rigging_source"] == "auto"


def test_adjudicate(capsys):
    assert cli.main(["adjudicate", "-n", "1"]) == 0
    assert "lemma-3.3:shape-N" in capsys.readouterr().out


def test_malformed_config_file_exit_code(tmp_path, capsys):
    config_path = tmp_path / "run.env"
    config_path.write_text(
        "immersion.kind=catalog\nimmersion.entry=light-cone\n"
        "ambient.matrix=-1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1\nambient.index=one\n"
    )
    assert cli.main(["check", "-c", str(config_path), "-n", "1", "-q"]) == 2
    assert "ambient.index" in capsys.readouterr().err


def test_example_flag_conflicts_with_config_geometry(tmp_path, capsys):
    config_path = tmp_path / "plane.env"
    assert cli.main(["export", "null-hyperplane", "-o", str(config_path)]) == 0
    assert cli.main(["check", "-c", str(config_path), "-e", "light-cone", "-n", "1", "-q"]) == 2
    assert "drop one of them" in capsys.readouterr().err
