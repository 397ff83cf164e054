import numpy as np
import pytest

from holderlab import growthfn as gf
from holderlab.elliptic import make_laplacian
from holderlab.extension import (
    DATUM_NAMES,
    ConvolutionField,
    ExtensionError,
    check_modulus,
    conical_square,
    conical_squares,
    datum_catalog,
    decaying_cos_field,
    extend,
    gradient,
    linear_field,
    trace_probe,
    vertical_square,
)
from holderlab.poisson import PoissonKernel


def sqrt_abs_exact(x, t):
    # harmonic extension of |x|^(1/2): sqrt(2) Re sqrt(t - i x)
    return np.sqrt(2) * np.real(np.sqrt(t - 1j * x))


def test_cos_extension(lap2):
    r = extend(lap2, datum_catalog("cos"), [[0.0, 1.0], [0.7, 0.25]])
    exact = np.exp(-np.array([1.0, 0.25])) * np.cos([0.0, 0.7])
    assert np.abs(r.values[:, 0] - exact).max() < 1e-6


def test_sqrt_abs_extension(lap2):
    pts = np.array([[0.3, 0.1], [-2.0, 1e-3], [5.0, 2.0]])
    r = extend(lap2, datum_catalog("sqrt-abs"), pts)
    assert np.abs(r.values[:, 0] - sqrt_abs_exact(pts[:, 0], pts[:, 1])).max() < 1e-5


def test_sqrt_diff_kinks(lap2, rng):
    # kinks at +-1 sitting near panel edges used to spoil ungraded panels
    f = datum_catalog("sqrt-diff")
    pts = np.c_[rng.uniform(-3, 3, 50), 2.0 ** rng.uniform(-8, 1, 50)]
    u = extend(lap2, f, pts).values[:, 0]
    exact = sqrt_abs_exact(pts[:, 0] - 1, pts[:, 1]) - sqrt_abs_exact(pts[:, 0] + 1, pts[:, 1])
    assert np.abs(u - exact).max() < 1e-5


def test_constant_exact(lap2):
    assert extend(lap2, datum_catalog("constant", c=3.0), [[1.0, 2.0]]).values[0, 0] == pytest.approx(3.0)


def test_linear_value_unbounded(lap2):
    with pytest.raises(ExtensionError):
        extend(lap2, datum_catalog("linear"), [[0.0, 1.0]])


def test_linear_gradient(lap2):
    g = gradient(lap2, datum_catalog("linear"), [[1.0, 2.0], [5.0, 0.1]]).values[..., 0]
    assert np.abs(g - [[1.0, 0.0], [1.0, 0.0]]).max() < 1e-5


def test_gradient_fd_consistency(lap2):
    pts = [[0.3, 0.1], [-2.0, 1e-3], [5.0, 2.0]]
    g = gradient(lap2, datum_catalog("sqrt-abs"), pts, fd_check=True)
    assert not np.any(g.fd_flag)


def test_cos_gradient(lap2):
    g = gradient(lap2, datum_catalog("cos"), [[0.3, 0.5]]).values[0, :, 0]
    exact = -np.exp(-0.5) * np.array([np.sin(0.3), np.cos(0.3)])
    assert np.abs(g - exact).max() < 1e-5


def test_lame_vector_cos(lame2):
    u = extend(lame2, datum_catalog("vector-cos"), [[0.0, 1.0]]).values[0]
    assert u[0] == pytest.approx(0.18394, abs=1e-4)


@pytest.mark.parametrize("name", DATUM_NAMES)
def test_catalog_modulus(name):
    ratio, ok = check_modulus(datum_catalog(name))
    assert ok


def test_trace_cos(lap2):
    rep = trace_probe(lap2, datum_catalog("cos"), [0.0], 1.0, 2.0 ** -np.arange(0, 21))
    assert rep.passed and rep.errors[-1] < 1e-5


def test_trace_three_dimensions():
    K3 = PoissonKernel(make_laplacian(3))
    rep = trace_probe(K3, datum_catalog("logplus-x1", n=3), [2.0, 0.0], 1.0, 2.0 ** -np.arange(1, 12))
    assert rep.passed and rep.target[0] == pytest.approx(np.log(2))


def test_trace_rejects_increasing(lap2):
    with pytest.raises(ValueError):
        trace_probe(lap2, datum_catalog("cos"), [0.0], 1.0, [0.1, 0.2])


def test_square_functions_linear():
    fl = linear_field()
    assert vertical_square(fl, [[0.0]], 3.0)[0] == pytest.approx(3 / np.sqrt(2), rel=1e-6)
    assert conical_square(fl, [[0.0]], 1.0, 3.0)[0] == pytest.approx(3.0, rel=1e-6)
    # |Gamma| = 2 kappa t^2 / ... : A^2 = kappa ell^2 / 1 for kappa = 3, ell = 1
    assert conical_square(fl, [[0.0]], 3.0, 1.0)[0] ** 2 == pytest.approx(3.0, rel=1e-6)


def test_conical_squares_matches_single():
    f = decaying_cos_field()
    A = conical_squares(f, [[0.0], [0.5]], (1.0, 2.0), (1.0, 0.5))
    for i, k in enumerate((1.0, 2.0)):
        for j, ell in enumerate((1.0, 0.5)):
            assert np.allclose(A[i, j], conical_square(f, [[0.0], [0.5]], k, ell), rtol=1e-8)


def test_convolution_field_square(lap2):
    # V for e^{-t} cos x at x = 0: int_0^ell t e^{-2t} dt
    f = ConvolutionField(lap2, datum_catalog("cos"))
    v = vertical_square(f, [[0.0]], 2.0)[0]
    exact = np.sqrt((1 - np.exp(-4) * 5) / 4)
    assert v == pytest.approx(exact, rel=1e-5)


def test_datum_unknown():
    with pytest.raises(ValueError):
        datum_catalog("nope")
