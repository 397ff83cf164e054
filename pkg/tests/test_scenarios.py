import numpy as np
import pytest

from holderlab import growthfn as gf
from holderlab import scenarios as sc
from holderlab.extension import datum_catalog
from holderlab.seminorms import CubeSweep

SWEEP = CubeSweep((-1.0,), 2.0, (0, 3), 4)


def test_h_bruteforce_closed_form():
    assert sc.h_bruteforce(1.0, 2.0) == pytest.approx(3 - 4 * np.log(2), abs=1e-12)
    assert sc.h_bruteforce(-0.5, 0.5) == 0.0
    with pytest.raises(ValueError):
        sc.h_bruteforce(1.0, 1.0)


def test_w_example6_matches_transform():
    om = gf.catalog("example6", alpha=0.3, beta=0.7)
    t = np.array([0.1, 1.0, 5.0, 100.0])
    assert np.allclose(gf.w_transform(om, t), sc.w_example6(t, 0.3, 0.7), rtol=1e-8)


def test_chebyshev_constant_plane():
    # d = 1, kappa = 3: 2 * 3 * 7^3
    assert sc.chebyshev_constant(1, 3.0) == pytest.approx(2058.0)


def test_example6_small():
    r = sc.scenario_example6(sample_budget=100)
    assert r.verdict == "PASS"
    assert set(r.tables) == {"H", "ratios"}
    seq = [row["ratio"] for row in r.tables["ratios"]]
    # omega(e^10 - 1) differs from 1 + sqrt(10) by about 2e-6 relative
    assert seq[0] == pytest.approx(10 / (1 + np.sqrt(10)), rel=1e-5)


def test_dirichlet_degenerate(lap2):
    r = sc.scenario_dirichlet("holder", lap2, gf.catalog("power", alpha=0.5), datum_catalog("constant", c=2.0), SWEEP, pairs={"budget": 100})
    assert r.verdict == "PASS-degenerate"


def test_dirichlet_precondition(lap2):
    with pytest.raises(sc.PreconditionError):
        sc.scenario_dirichlet("holder", lap2, gf.linear(), datum_catalog("cos"), SWEEP)
    with pytest.raises(ValueError):
        sc.scenario_dirichlet("other", lap2, gf.catalog("power", alpha=0.5), datum_catalog("cos"), SWEEP)


def test_equivalence_linear_closed_forms(lap2):
    r = sc.scenario_equivalence(lap2, gf.linear(), datum_catalog("linear"), SWEEP, pairs={"budget": 200})
    assert r.metrics["q=2"] == pytest.approx(1 / np.sqrt(2), abs=1e-6)
    assert r.metrics["inf"] == pytest.approx(1.0, abs=1e-9)
    assert not r.metrics["condition_main"]
    row = next(x for x in r.tables["ratios"] if x["a"] == "q=2" and x["b"] == "inf")
    assert 1 / row["ratio"] == pytest.approx(np.sqrt(2), rel=1e-6)


def test_equivalence_constant(lap2):
    r = sc.scenario_equivalence(lap2, gf.catalog("power", alpha=0.5), datum_catalog("constant"), SWEEP, pairs={"budget": 100})
    assert r.verdict == "PASS-degenerate"


def test_fatou_constant(lap2):
    r = sc.scenario_fatou(lap2, datum_catalog("constant", c=2.0))
    assert r.metrics["slice_residual"] == 0.0
    assert r.verdict == "PASS-degenerate"


def test_jn_conical_constant(lap2):
    r = sc.scenario_jn("conical", 0.5, K=lap2, omega=gf.catalog("power", alpha=0.5), f=datum_catalog("constant"), depth=2, cells_per_axis=8)
    assert r.verdict == "PASS-degenerate"


def test_jn_unknown_variant():
    with pytest.raises(ValueError):
        sc.scenario_jn("nope", 0.5)


def test_verdict_from_checks():
    ok = sc.ScenarioResult("x", "k", [sc.check("a", 1, 2, True)])
    bad = sc.ScenarioResult("x", "k", [sc.check("a", 3, 2, False)], degenerate=True)
    assert ok.verdict == "PASS" and bad.verdict == "FAIL"
