import numpy as np
import pytest

from core import verifier
from core.verifier import (
    CHECK_IDS,
    CHECKS,
    DOCUMENTED_SIGNS,
    CheckDef,
    Measurement,
    adjudicate,
    check_conformal_screen,
    check_lemma_33,
    check_prop_41,
    check_prop_42,
    evaluate,
    fundamental_relations_check,
    gauss_equation_check,
    lemma_33_residuals,
    nonmetricity_check,
    prop_41_residuals,
    resolve_tolerance,
    rigged_index_expected,
    select_checks,
    summarize,
)
from tests.conftest import LIGHT_CONE_POINT, context_for, geometry_at


def flipped(name):
    return dict(DOCUMENTED_SIGNS, **{name: -DOCUMENTED_SIGNS[name]})


def test_registry_is_consistent():
    assert len(CHECK_IDS) == len(set(CHECK_IDS)) == len(CHECKS)
    for suite in ("frames", "metric", "connection", "curvature", "conformal"):
        assert select_checks(suite)
        assert all(c.suite == suite for c in select_checks(suite))
    assert len(select_checks("all")) == len(CHECKS)


def test_tolerance_resolution_order():
    check = next(c for c in CHECKS if c.id == "lemma-3.3")
    assert resolve_tolerance(check, {}) == check.tolerance
    assert resolve_tolerance(check, {"all": 1.0}) == 1.0
    assert resolve_tolerance(check, {"all": 1.0, "metric": 2.0}) == 2.0
    assert resolve_tolerance(check, {"all": 1.0, "metric": 2.0, "lemma-3.3": 3.0}) == 3.0


def test_every_check_passes_on_null_hyperplane(null_hyperplane_geo):
    ctx = context_for("null-hyperplane", oracle=True)
    results = evaluate(null_hyperplane_geo, ctx, CHECKS)
    for check in CHECKS:
        m = results[check.id]
        if m.skip is None:
            assert m.residual is not None and m.residual < check.tolerance, check.id


def test_lemma_33_on_light_cone(light_cone_geo):
    assert np.abs(lemma_33_residuals(light_cone_geo)).max() < 1e-9
    assert np.abs(lemma_33_residuals(light_cone_geo, flipped("lemma-3.3:shape-N"))).max() > 1e-2
    X = np.array([0.0, 1.0, 0.0])
    Z = np.array([1.0, 0.0, 0.0])
    assert check_lemma_33(light_cone_geo, X, X, Z) < 1e-9


def test_prop_41_on_light_cone(light_cone_geo):
    assert np.abs(prop_41_residuals(light_cone_geo)).max() < 1e-9
    X = np.array([0.0, 1.0, 0.0])
    assert check_prop_41(light_cone_geo, X, X) < 1e-9
    assert check_prop_41(light_cone_geo, X, X, flipped("prop-4.1:shape-xi")) > 0.1


def test_prop_42_on_light_cone(light_cone_geo):
    X, Y = np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    screen, radical = check_prop_42(light_cone_geo, X, Y, X, Y)
    assert screen < 1e-7
    assert radical < 1e-7


def test_conformal_screen_factor_of_light_cone(light_cone_geo):
    fit = check_conformal_screen(light_cone_geo)
    assert fit.conformal
    assert fit.phi[0] == pytest.approx(0.5)


def test_conformal_screen_both_zero(null_hyperplane_geo):
    fit = check_conformal_screen(null_hyperplane_geo)
    assert fit.both_zero == [True]


@pytest.mark.parametrize("sign,index", [(1, 0), (-1, 1)])
def test_rigged_index_formula(sign, index):
    geo = geometry_at("light-cone", LIGHT_CONE_POINT, sign=sign)
    assert rigged_index_expected(geo) == index == geo.rigged.index


def test_skips_on_non_coisotropic_and_open_normalizations():
    r1 = geometry_at("r1-lightlike-surface", [0.1, 0.8])
    results = evaluate(r1, context_for("r1-lightlike-surface"), CHECKS)
    assert results["prop-4.1-closed"].skip == "not coisotropic"
    assert results["gauss-2.22"].skip == "not coisotropic"
    assert results["relations-2.15-2.16"].skip is None

    tilted = geometry_at("light-cone-tilted", LIGHT_CONE_POINT)
    results = evaluate(tilted, context_for("light-cone-tilted"), CHECKS)
    assert results["prop-4.1-closed"].skip == "normalization not closed"
    assert "raw-residual" in results["prop-4.1-closed"].diagnostics
    assert results["prop-4.2-radical"].skip == "normalization not closed"
    assert results["lemma-3.4"].skip == "no ambient extension of the rigging"
    assert results["closed-normalization"].residual == 0.0


def test_oracle_only_on_oracle_samples(light_cone_geo):
    check = next(c for c in CHECKS if c.id == "oracle-equivalence")
    assert check.fn(light_cone_geo, context_for("light-cone", oracle=False)).residual is None
    compared = check.fn(light_cone_geo, context_for("light-cone", oracle=True))
    assert compared.residual < check.tolerance
    assert compared.diagnostics["worst-quantity"]


def test_expected_values_on_light_cone(light_cone_geo):
    check = next(c for c in CHECKS if c.id == "expected-values")
    m = check.fn(light_cone_geo, context_for("light-cone"))
    assert m.residual < check.tolerance
    assert m.diagnostics["g_tilde"].endswith("[DERIVED: oracle]")


def test_summarize_aggregates_and_skips():
    check = CheckDef("demo", "frames", 1e-3, lambda geo, ctx: Measurement())
    record = summarize(check, [Measurement(1e-4), Measurement(skip="reason"), Measurement(5e-4)])
    assert record.status == "pass"
    assert record.samples == 2
    assert record.max_residual == pytest.approx(5e-4)
    assert record.diagnostics["skipped-samples"] == 1

    failed = summarize(check, [Measurement(2e-3)])
    assert failed.status == "fail"
    assert summarize(check, [Measurement(2e-3)], tolerance=1e-2).status == "pass"

    skipped = summarize(check, [Measurement(skip="no extension"), Measurement(skip="no extension")])
    assert skipped.status == "skipped"
    assert skipped.skip_reason == "no extension"
    assert skipped.to_dict()["max_residual"] is None


def test_summarize_keeps_largest_numeric_diagnostic():
    check = CheckDef("demo", "frames", 1.0, lambda geo, ctx: Measurement())
    record = summarize(check, [Measurement(0.1, diagnostics={"x": 0.5}), Measurement(0.2, diagnostics={"x": -0.7})])
    assert record.diagnostics["x"] == -0.7


def test_adjudication_prefers_documented_signs(light_cone_geo):
    table = adjudicate([light_cone_geo])
    rows = {row["constant"]: row for row in table}
    assert set(rows) == set(DOCUMENTED_SIGNS)
    for name in ("lemma-3.3:shape-N", "prop-4.1:shape-xi"):
        assert rows[name]["agrees"], name
        assert rows[name]["residual_plus"] != rows[name]["residual_minus"]
    assert rows["prop-4.1:shape-xi"]["points"] == 1


def test_unsupported_check_becomes_a_skip(light_cone_geo):
    def unsupported(geo, ctx):
        raise verifier.UnsupportedError("not here")

    results = evaluate(light_cone_geo, context_for("light-cone"), [CheckDef("demo", "frames", 1.0, unsupported)])
    assert results["demo"].skip == "not here"


def test_fundamental_relations_and_nonmetricity(light_cone_geo):
    parts = fundamental_relations_check(light_cone_geo)
    assert set(parts) == {"form-pairing", "shape-N-pairing", "radical", "kernel"}
    assert max(parts.values()) < 1e-9
    assert nonmetricity_check(light_cone_geo) < 1e-9


def test_gauss_equation_on_light_cone(light_cone_geo):
    parts = gauss_equation_check(light_cone_geo)
    assert parts["residual"] < 1e-8
    assert parts["product-norm"] > 0.1


def test_gauss_equation_needs_coisotropic():
    with pytest.raises(verifier.UnsupportedError, match="not coisotropic"):
        gauss_equation_check(geometry_at("r1-lightlike-surface", [0.1, 0.8]))
