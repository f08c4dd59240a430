import numpy as np
import pytest

from core.catalog import get_entry
from integrations.config_file import (
    export_entry,
    format_matrix,
    load_config_file,
    merge_run_config,
    parse_matrix,
)
from utils.config import RunConfig
from utils.errors import ConfigurationError


def write(tmp_path, text, name="run.env"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_matrix_parsing():
    m = parse_matrix("-1,0;0,1")
    assert np.array_equal(m, np.diag([-1.0, 1.0]))
    assert np.array_equal(parse_matrix(format_matrix(m)), m)
    with pytest.raises(ConfigurationError):
        parse_matrix("1,0;0")
    with pytest.raises(ConfigurationError):
        parse_matrix("1,x")


@pytest.mark.parametrize("entry_id", ["null-hyperplane", "light-cone", "nullline-x-sphere"])
def test_exported_entry_loads_back(tmp_path, entry_id):
    original = get_entry(entry_id)
    run, entry = load_config_file(write(tmp_path, export_entry(original)))
    assert run["example"] == entry_id
    assert entry.classification == original.classification
    assert entry.ambient.dim == original.ambient.dim
    assert entry.ambient.index == original.ambient.index
    assert np.allclose(np.asarray(entry.immersion.box), np.asarray(original.immersion.box))
    u = np.mean(np.asarray(original.immersion.box), axis=0)
    x = np.asarray(original.immersion.map_fn(u), dtype=float)
    assert np.allclose(entry.ambient.metric(x), original.ambient.metric(x))
    assert np.allclose(np.asarray(entry.immersion.map_fn(u), dtype=float), x)


def test_run_keys_and_tolerances(tmp_path):
    run, entry = load_config_file(write(tmp_path, "example=light-cone\nsamples=7\ntimestamp=no\ntolerance.lemma-3.3=1e-6\n"))
    assert entry is None
    assert run == {"example": "light-cone", "samples": 7, "timestamp": False, "tolerance": {"lemma-3.3": 1e-6}}


def test_linear_immersion_in_warped_ambient(tmp_path):
    text = "\n".join(
        [
            "example=my-plane",
            "ambient.kind=constant",
            "ambient.matrix=-1,0,0;0,1,0;0,0,1",
            "immersion.kind=linear",
            "immersion.matrix=1,0;1,0;0,1",
            "immersion.box.low=-1,-1",
            "immersion.box.high=1,1",
        ]
    )
    run, entry = load_config_file(write(tmp_path, text))
    assert run["example"] == "my-plane"
    assert entry.classification == "coisotropic"
    assert entry.supported
    assert entry.expected == {}


@pytest.mark.parametrize(
    "text,message",
    [
        ("colour=blue\n", "Unknown configuration key"),
        ("samples=many\n", "Bad value"),
        ("tolerance.lemma-3.3=small\n", "Bad tolerance"),
        ("ambient.kind=constant\nambient.matrix=1,0;0,1\n", "immersion"),
        ("immersion.kind=linear\nimmersion.matrix=1,0;0,1;0,0\n", "box"),
        ("immersion.kind=spline\n", "Unknown immersion family"),
        ("immersion.kind=catalog\nimmersion.entry=light-cone\nimmersion.colour=red\n", "Unknown configuration key"),
        ("immersion.kind=catalog\nimmersion.entry=light-cone\nambient.kind=hyperbolic\n", "Unknown ambient family"),
        ("immersion.kind=catalog\nimmersion.entry=light-cone\nambient.matrix=-1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1\nambient.index=one\n", "ambient.index"),
        ("immersion.kind=catalog\nimmersion.entry=light-cone\nambient.kind=warped\nambient.blocks=-1,0;0,1|1,0;0,1\nambient.index=1.5\n", "ambient.index"),
    ],
)
def test_malformed_files(tmp_path, text, message):
    with pytest.raises(ConfigurationError, match=message):
        load_config_file(write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError, match="not found"):
        load_config_file(str(tmp_path / "missing.env"))


def test_flags_win_over_file_values():
    merged = merge_run_config(
        {"samples": 5, "suite": "metric", "tolerance": {"lemma-3.3": 1e-6, "all": 1e-3}},
        {"samples": 9, "suite": None, "tolerance": {"lemma-3.3": 1e-5}, "seed": None},
    )
    assert isinstance(merged, RunConfig)
    assert merged.samples == 9
    assert merged.suite == "metric"
    assert merged.tolerance == {"lemma-3.3": 1e-5, "all": 1e-3}


def test_run_config_rejects_bad_values():
    with pytest.raises(ConfigurationError):
        merge_run_config({"sign_convention": 2}, {})
    with pytest.raises(ConfigurationError):
        merge_run_config({}, {"tolerance": {"all": -1.0}})
    with pytest.raises(ConfigurationError, match="Unknown configuration keys"):
        RunConfig.from_mapping({"colour": "blue"})
