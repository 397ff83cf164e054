import numpy as np
import pytest

from holderlab.elliptic import ellipticity_constant, make_lame, make_laplacian, make_scalar_div, make_system, symbol_pencil


def test_laplacian_constant():
    assert ellipticity_constant(make_laplacian(2), samples=4096) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("mu,lam", [(1.0, 1.0), (1.0, -1.5), (0.5 + 0.2j, 0.3 - 0.4j), (2.0, -3.9)])
def test_lame_constant(mu, lam):
    L, ok = make_lame(2, mu, lam)
    target = min(complex(mu).real, (2 * mu + lam).real)
    assert ellipticity_constant(L, samples=20000) == pytest.approx(target, abs=1e-2)
    assert ok == (target > 0)


def test_hermitian_scalar():
    # A = [[1, i/2], [-i/2, 1]] has real form |xi|^2 on real xi
    k = ellipticity_constant(make_scalar_div([[1, 0.5j], [-0.5j, 1]]), samples=20000)
    assert k == pytest.approx(1.0, abs=1e-2)


def test_shape_check():
    with pytest.raises(ValueError):
        make_system(2, 1, np.ones((2, 2, 1)))


def test_pencil_laplacian():
    p = symbol_pencil(make_laplacian(2), [2.0])
    # tau^2 + 4 vanishes at tau = 2i
    assert abs(p(2j)[0, 0]) < 1e-12
