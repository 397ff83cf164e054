import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holderlab import growthfn as gf


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_power_tail_constant(alpha):
    rep = gf.check_condition_b(gf.catalog("power", alpha=alpha))
    assert rep.satisfied
    assert rep.constant == pytest.approx(1 / (1 - alpha), rel=0.02)


@given(st.floats(0.1, 0.9), st.floats(-12, 12))
@settings(max_examples=25, deadline=None)
def test_w_transform_power(alpha, log_t):
    t = 2.0**log_t
    W = gf.w_transform(gf.catalog("power", alpha=alpha), t)
    assert W == pytest.approx(t**alpha / alpha, rel=1e-8)


def test_w_transform_power_09_at_1024():
    # 1024^0.9 / 0.9, the value a power modulus must give
    W = gf.w_transform(gf.catalog("power", alpha=0.9), 2.0**10)
    assert W == pytest.approx(568.889, rel=1e-5)


def test_w_transform_example6_closed_form():
    om = gf.catalog("example6", alpha=0.5, beta=0.5)
    # 1/alpha + 1/(beta + 1) + 1 at t = e
    assert gf.w_transform(om, np.e) == pytest.approx(2 + 2 / 3 + 1, rel=1e-10)


def test_linear_fails_tail_condition():
    assert not gf.check_condition_b(gf.linear()).satisfied


def test_constant_one_fails_dini():
    with pytest.raises(gf.DivergenceError):
        gf.w_transform(gf.constant_one(), 1.0)


def test_example6_conditions():
    om = gf.catalog("example6", alpha=0.5, beta=0.5)
    assert gf.check_condition_b(om).satisfied
    assert np.isfinite(gf.w_transform(om, 1.0))
    assert not gf.check_condition_main(om).satisfied


def test_power_main_condition_constants():
    rep = gf.check_condition_main(gf.catalog("power", alpha=0.5))
    assert rep.satisfied
    # W = 2 sqrt(t) gives W / omega = 2
    assert rep.sub_constant == pytest.approx(2.0, rel=1e-6)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_dilation_indices_power(alpha):
    lo, hi = gf.dilation_indices(gf.catalog("power", alpha=alpha))
    assert lo == pytest.approx(alpha, abs=0.01)
    assert hi == pytest.approx(alpha, abs=0.01)


def test_dilation_indices_min_t_one():
    lo, hi = gf.dilation_indices(gf.GrowthFunction(lambda t: np.minimum(t, 1.0), "min(t,1)"))
    assert lo == pytest.approx(0.0, abs=1e-9)
    assert hi == pytest.approx(1.0, abs=1e-9)


def test_w_function_satisfies_tail_condition():
    om = gf.catalog("power", alpha=0.5)
    C = gf.check_condition_b(om).constant
    rep = gf.check_condition_b(gf.w_function(om))
    assert rep.satisfied and rep.constant <= 1.05 * (1 + C**2)


def test_quasi_properties():
    om = gf.catalog("power", alpha=0.5)
    rep = gf.quasi_properties_report(om, gf.check_condition_b(om).constant)
    assert rep.consistent


def test_catalog_rejects_unknown():
    with pytest.raises(ValueError):
        gf.catalog("nope")


def test_report_row_schema():
    row = gf.check_condition_b(gf.catalog("power", alpha=0.5)).to_row()
    assert list(row) == ["label", "condition", "satisfied", "constant", "witness_t"]
