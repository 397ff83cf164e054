import numpy as np
import pytest

from holderlab import growthfn as gf
from holderlab.extension import datum_catalog, decaying_cos_field, linear_field
from holderlab.seminorms import (
    Cube,
    CubeSweep,
    SquareTable,
    cube_rule,
    doubling_report,
    holder_seminorm,
    log_lattice,
    luxemburg_from_samples,
    luxemburg_norm,
    morrey_campanato_seminorm,
    osc_p,
    sample_pairs,
    star2_exp,
    star2_inf,
    star2_q,
)

ROOT = gf.catalog("power", alpha=0.5)


def test_sweep_doubling_is_superset():
    sw = CubeSweep((0.0,), 8.0, (0, 6), 8, 0)
    assert set(sw.cubes()) <= set(sw.doubled().cubes())
    assert sw.doubled().count > sw.count


def test_sweep_validation():
    with pytest.raises(ValueError):
        CubeSweep((0.0,), -1.0, (0, 2))
    with pytest.raises(ValueError):
        CubeSweep((0.0,), 1.0, (3, 2))


def test_cube_rule_weights():
    nodes, w = cube_rule(Cube((0.0, 0.0), 2.0), cuts=(0.5,))
    assert w.sum() == pytest.approx(1.0)
    assert nodes.shape[1] == 2
    # mean of x1 over [0, 2]^2
    assert w @ nodes[:, 0] == pytest.approx(1.0)


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_luxemburg_constant(c):
    assert luxemburg_norm(lambda x: np.full(len(x), c), Cube((0.0,), 1.0)) == pytest.approx(c / np.log(2), abs=1e-8)


def test_luxemburg_indicator():
    # mean(e^{1/tau} - 1) / 2 = 1  =>  tau = 1 / log 3
    v = luxemburg_norm(lambda x: (x[:, 0] < 0.5) * 1.0, Cube((0.0,), 1.0), cuts=(0.5,))
    assert v == pytest.approx(1 / np.log(3), abs=1e-10)


def test_luxemburg_zero_and_scaling():
    assert luxemburg_from_samples(np.zeros(5), np.full(5, 0.2)) == 0.0
    g = np.array([0.1, 2.0, 5.0])
    w = np.array([0.5, 0.3, 0.2])
    assert luxemburg_from_samples(3 * g, w) == pytest.approx(3 * luxemburg_from_samples(g, w), rel=1e-10)


def test_osc_linear():
    sw = CubeSweep((0.0,), 8.0, (0, 6), 8, 0)
    lin = datum_catalog("linear")
    # mean |x - x_Q| over a cube of side r is r / 4
    assert osc_p(lin, 1, 1.0, sw).value == pytest.approx(0.25, rel=1e-10)
    assert morrey_campanato_seminorm(lin, gf.linear(), 1, sw).value == pytest.approx(0.25, rel=1e-10)


def test_osc_constant_zero():
    sw = CubeSweep((0.0,), 8.0, (0, 3), 4, 0)
    assert osc_p(datum_catalog("constant", c=2.0), 2, 1.0, sw).value == 0.0


def test_holder_sqrt_abs():
    e = holder_seminorm(datum_catalog("sqrt-abs"), ROOT, 1, 2000, 0)
    assert e.value == pytest.approx(1.0, abs=1e-6)


def test_pair_sample_reuse():
    ps = sample_pairs(datum_catalog("sqrt-abs"), 1, 500, 0)
    assert ps.estimate(ROOT).value == pytest.approx(1.0, abs=1e-6)
    # W = 2 sqrt(t) halves the ratio
    assert ps.estimate(ROOT.scaled(2.0)).value == pytest.approx(0.5, abs=1e-6)


def test_star2_linear_closed_forms():
    fl = linear_field()
    sw = CubeSweep((0.0,), 4.0, (0, 3), 4, 0)
    assert star2_q(fl, gf.linear(), 2, sw).value == pytest.approx(1 / np.sqrt(2), abs=1e-6)
    assert star2_exp(fl, gf.linear(), sw).value == pytest.approx(1 / (np.sqrt(2) * np.log(2)), abs=1e-6)
    assert star2_inf(fl, gf.linear(), log_lattice([[0.0]])).value == pytest.approx(1.0)


def test_star2_inf_decaying_cos():
    # t e^{-t} / t peaks at t -> 0 with value 1
    v = star2_inf(decaying_cos_field(), gf.linear(), log_lattice([[0.0]], (-20, 4))).value
    assert v == pytest.approx(1.0, abs=1e-5)


def test_square_table_cache():
    tab = SquareTable(linear_field())
    c = Cube((0.0,), 1.0)
    v1, _ = tab(c)
    v2, _ = tab(c)
    assert v1 is v2


def test_doubling_report_keys():
    lin = datum_catalog("linear")
    rep = doubling_report(lambda s: osc_p(lin, 1, 1.0, s), CubeSweep((0.0,), 8.0, (0, 4), 4, 0))
    assert set(rep) == {"base", "doubled", "relative_change"}
    assert rep["relative_change"] == pytest.approx(0.0, abs=1e-12)


def test_star2_q_rejects_bad_q():
    with pytest.raises(ValueError):
        star2_q(linear_field(), gf.linear(), 0.0, CubeSweep((0.0,), 1.0, (0, 1)))
