import numpy as np
import pytest

from holderlab.elliptic import make_lame, make_laplacian
from holderlab.poisson import (
    PoissonKernel,
    kernel_diagnostics,
    kernel_grid,
    laplacian_kernel,
    normal_derivative_is_even,
    pde_residual,
    semigroup_residual,
    spectral_symbol,
)


def test_laplacian_symbol(rng):
    L = make_laplacian(2)
    for _ in range(200):
        xi = rng.normal(size=1) * rng.choice([0.01, 1.0, 100.0])
        t = rng.uniform(0, 3)
        assert spectral_symbol(L, xi, t)[0, 0] == pytest.approx(np.exp(-t * abs(xi[0])), rel=1e-10)


def test_laplacian_kernel_values():
    assert laplacian_kernel(2, 0.0) == pytest.approx(1 / np.pi)
    # n = 3: 2 / (2 pi) (1 + |x|^2)^(-3/2) at |x|^2 = 2
    assert laplacian_kernel(3, [1.0, 1.0]) == pytest.approx(1 / (2 * np.pi) * 3**-1.5)


def test_spectral_matches_closed_form():
    x = np.linspace(-5, 5, 11)
    Ks, Kc = PoissonKernel(make_laplacian(2), "spectral"), PoissonKernel(make_laplacian(2))
    assert np.abs(Ks(x, 1.0) - Kc(x, 1.0)).max() < 1e-8


def test_grid_matches_closed_form():
    g = kernel_grid(PoissonKernel(make_laplacian(2), "spectral"), 1.0)
    c = g.coords
    m = np.abs(c) < c.max() / 2
    assert np.abs(g.values[m, 0, 0] - laplacian_kernel(2, c[m])).max() < 1e-6
    assert abs(g.integral[0, 0] - 1) < 1e-6


def test_semigroup_lame(rng):
    xs = rng.normal(size=(50, 1)) * 3
    assert semigroup_residual(make_lame(2, 1, 1)[0], xs, 0.7, 0.7) < 1e-10


def test_closed_form_only_for_laplacian():
    with pytest.raises(ValueError):
        PoissonKernel(make_lame(2, 1, 1)[0], "closed-form")


def test_lame_diagnostics():
    r = kernel_diagnostics(PoissonKernel(make_lame(2, 1, 1)[0]), t_list=(1.0,))
    assert max(r.normalization_defect.values()) < 1e-6
    assert r.decay_exponent == pytest.approx(-1.0, abs=0.05)
    assert r.pde_order2_ratio == pytest.approx(4.0, rel=0.1)


def test_pde_residual_laplacian():
    assert pde_residual(PoissonKernel(make_laplacian(2)), 2.0**-8) < 1e-6


def test_gradient_matches_finite_difference():
    K = PoissonKernel(make_lame(2, 1, 1)[0])
    x, t, h = np.array([0.4]), 0.8, 1e-5
    g = K.grad(x, t)
    dx = (K(x + h, t) - K(x - h, t)) / (2 * h)
    dt = (K(x, t + h) - K(x, t - h)) / (2 * h)
    assert np.abs(g[..., 0, :, :] - dx).max() < 1e-6
    assert np.abs(g[..., 1, :, :] - dt).max() < 1e-6


def test_normal_derivative_parity():
    assert normal_derivative_is_even(PoissonKernel(make_laplacian(2)))
