import numpy as np
import pytest

from liedouble import catalog
from liedouble.algebra_core import LieAlgebra, Report
from liedouble.catalog import (CatalogLoadError, axb_basis, bracket_table, im_trace_metric, inversion_symmetry,
                               linearization_check, linearize_sb2c, load_catalog, perturbation_probe,
                               sb2c_point, trace_j_metric, trace_metric)
from liedouble.poisson import lam_matrix


def _gram(metric, basis):
    return np.array([[metric(U, V) for V in basis] for U in basis])


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def test_sl2c_entry(sl2c):
    assert sl2c.context.n == 6 and sl2c.double.complete
    assert np.allclose(_gram(im_trace_metric, sl2c.group.basis), sl2c.context.gram, atol=1e-14)
    assert all(r.passed for r in sl2c.checks)


def test_axb_entry(axb):
    assert axb.context.n == 4 and not axb.double.complete
    assert np.allclose(_gram(trace_metric, axb_basis()), axb.context.gram)
    assert axb.expected["metric"]["source"] == "derived"


def test_trace_j_metric_not_invariant():
    # tr(AJBJ) fails ad-invariance on gl(2,R), so the catalog uses tr(AB) - trA trB
    B = axb_basis()
    worst = 0.0
    for X in B:
        for Y in B:
            for Z in B:
                lhs = trace_j_metric(X @ Y - Y @ X, Z)
                rhs = trace_j_metric(X, Y @ Z - Z @ Y)
                worst = max(worst, abs(lhs - rhs))
    assert worst > 0.5


def test_aliases_resolve():
    for alias, key in catalog.ALIASES.items():
        assert key in catalog.CATALOG_NAMES


def test_unknown_name():
    with pytest.raises(KeyError):
        load_catalog("so(3)")


def test_failed_load_check_raises(monkeypatch):
    monkeypatch.setattr(catalog, "invariant_suite", lambda entry: [Report("forced", 1.0, False)])
    with pytest.raises(CatalogLoadError):
        load_catalog("sl2c")


def test_expected_sources(sl2c, axb, cotangent):
    for entry in (sl2c, axb, cotangent):
        for item in entry.expected.values():
            assert item["source"] in ("reference table", "derived")


def test_summary_is_plain(sl2c):
    s = sl2c.summary()
    assert s["name"] == "sl2c_su2_sb2" and s["dim"] == 6 and s["complete"] is True
    assert all(set(c) >= {"check", "residual", "pass"} for c in s["checks"])


def test_cotangent_abelian_is_flat():
    entry = load_catalog("cotangent", algebra=LieAlgebra.abelian(2))
    assert entry.expected["flat_when_abelian"]["value"]
    rng = np.random.default_rng(0)
    for a in entry.points(rng, 5):
        assert np.allclose(lam_matrix(entry.context, "minus", a), 0, atol=1e-12)


def test_cotangent_nonabelian_is_not_flat(cotangent):
    assert not cotangent.expected["flat_when_abelian"]["value"]


# ---------------------------------------------------------------------------
# bracket-table harness
# ---------------------------------------------------------------------------

def test_bracket_table_rows(sl2c):
    rep = bracket_table(sl2c, samples=10)
    rows = rep.details["rows"]
    assert rep.passed and len(rows) == 17 and rows[-1]["row"] == "conjugate_closure"


def test_bracket_table_only_for_sl2c(axb):
    with pytest.raises(ValueError):
        bracket_table(axb, samples=2)


def test_inversion_symmetry(sl2c):
    rep = inversion_symmetry(sl2c, samples=10)
    assert rep.passed and rep.details["anti_symmetry_residual"] > 1e-3


def test_perturbation_probe_detects(sl2c):
    rep = perturbation_probe(sl2c, samples=5)
    assert rep.passed and "{z1,z4}" in rep.details["failing_rows"]


def test_bracket_table_deterministic(sl2c):
    a = bracket_table(sl2c, samples=5, seed=3)
    b = bracket_table(sl2c, samples=5, seed=3)
    assert a.to_dict() == b.to_dict()


# ---------------------------------------------------------------------------
# SB(2,C) linearization
# ---------------------------------------------------------------------------

def test_linearize_identity():
    assert np.allclose(linearize_sb2c(1.0, 0), 0)


def test_linearize_diagonal():
    assert np.allclose(linearize_sb2c(np.e, 0), [1, 0, 0])


def test_linearize_direction_follows_gamma():
    v = linearize_sb2c(1.0, 2j)
    assert v[1] == pytest.approx(0) and v[2] > 0


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_linearize_needs_positive_t(t):
    with pytest.raises(ValueError):
        linearize_sb2c(t, 0.5)


def test_sb2c_point_unimodular():
    assert np.linalg.det(sb2c_point(2.0, 1 + 1j)) == pytest.approx(1)


def test_unit_scale_tradeoff():
    # unit normalization matches the linear structure but doubles every table row
    unit = load_catalog("sl2c", scale="unit")
    lin = linearization_check(unit, samples=10)
    assert lin.passed and lin.details["scale_fit"] == pytest.approx(1, abs=1e-6)
    assert not bracket_table(unit, samples=3).passed
