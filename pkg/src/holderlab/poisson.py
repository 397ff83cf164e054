"""Poisson kernels of strongly elliptic systems in the upper half-space.

Fourier convention: f^(xi) = int f(x) exp(-i x.xi) dx.  For a fixed
tangential frequency xi the decaying null solutions exp(i(x.xi + t tau)) v
come from the roots of the symbol pencil with Im tau > 0.  An ordered Schur
form of the companion matrix gives an orthonormal basis [U11; U21] of that
stable subspace and its block T, and the Dirichlet-to-height map is

    P^(xi, t) = U11 exp(i t T) U11^{-1} = exp(i t N(xi)),

with the solvent N = U11 T U11^{-1} homogeneous of degree one in xi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np
import scipy.linalg as sla

from .elliptic import EllipticSystem, symbol_pencil

IM_SPLIT_TOL = 1e-8
COND_CAP = 1e12
RIM_TOL = 1e-8


class KernelError(ValueError):
    """The stable/unstable splitting or the boundary map broke down."""


# ---------------------------------------------------------------------------
# symbol


def _is_laplacian(L: EllipticSystem) -> bool:
    return L.M == 1 and np.array_equal(L.coeff[:, :, 0, 0], np.eye(L.n))


def stable_factor(L: EllipticSystem, direction) -> tuple[np.ndarray, np.ndarray]:
    """(U11, T) of the ordered Schur form at a unit tangential direction."""
    d = np.atleast_1d(np.asarray(direction, dtype=float))
    pen = symbol_pencil(L, d)
    M = L.M
    if np.linalg.cond(pen.A2) > COND_CAP:
        raise KernelError(f"normal coefficient block is singular at xi={d.tolist()}")
    inv2 = np.linalg.inv(pen.A2)
    comp = np.zeros((2 * M, 2 * M), dtype=complex)
    comp[:M, M:] = np.eye(M)
    comp[M:, :M] = -inv2 @ pen.A0
    comp[M:, M:] = -inv2 @ pen.A1
    T, Z, sdim = sla.schur(comp, output="complex", sort=lambda z: z.imag > 0)
    roots = np.diag(T)
    scale = np.linalg.norm(d)
    if np.min(np.abs(roots.imag)) <= IM_SPLIT_TOL * scale:
        raise KernelError(f"pencil has a real root at xi={d.tolist()}: system is not elliptic there")
    if sdim != M:
        raise KernelError(f"stable subspace has dimension {sdim}, expected {M}, at xi={d.tolist()}")
    U11 = Z[:M, :M]
    if np.linalg.cond(U11) > COND_CAP:
        raise KernelError(f"Dirichlet boundary map is numerically singular at xi={d.tolist()}")
    return U11, T[:M, :M]


def solvent(L: EllipticSystem, direction) -> np.ndarray:
    """N(xi) with A2 N^2 + A1 N + A0 = 0 and spectrum in the upper half-plane."""
    U, T = stable_factor(L, direction)
    return U @ T @ np.linalg.inv(U)


def spectral_symbol(L: EllipticSystem, xi, t: float) -> np.ndarray:
    """P^(xi, t) as an M x M complex matrix.

    The companion matrix is factored at the unit direction xi/|xi| and T is
    scaled by |xi|, which is the exact homogeneity of the pencil.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if t < 0:
        raise ValueError("height must be non-negative")
    r = float(np.linalg.norm(xi))
    if r == 0.0 or t == 0.0:
        return np.eye(L.M, dtype=complex)
    U, T = stable_factor(L, xi / r)
    return U @ expm_batch(1j * t * r * T) @ np.linalg.inv(U)


def semigroup_residual(L: EllipticSystem, xis, s: float, t: float) -> float:
    """max over xi of |P^(xi,s) P^(xi,t) - P^(xi,s+t)| (spectral norm)."""
    worst = 0.0
    for xi in np.atleast_2d(np.asarray(xis, dtype=float).reshape(len(xis), -1)):
        lhs = spectral_symbol(L, xi, s) @ spectral_symbol(L, xi, t)
        rhs = spectral_symbol(L, xi, s + t)
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    return worst


def laplacian_kernel(n: int, x) -> np.ndarray:
    """Height-one profile Gamma(n/2) pi^(-n/2) (1 + |x|^2)^(-n/2)."""
    if n not in (2, 3):
        raise ValueError(f"closed-form kernel supported for n in (2, 3), got {n}")
    x = np.asarray(x, dtype=float)
    if n == 2:
        r2 = x**2
    else:
        if x.shape[-1:] != (2,):
            raise ValueError("n=3 points need two coordinates")
        r2 = np.sum(x**2, axis=-1)
    return gamma(n / 2) / pi ** (n / 2) * (1.0 + r2) ** (-n / 2)


# ---------------------------------------------------------------------------
# real-space kernel


@dataclass
class PoissonKernel:
    """Evaluator for P_t(x) = t^(1-n) P(x/t) and its gradient.

    ``mode`` is "closed-form" for the Laplacian and "spectral" otherwise.
    The diagnostic caches are filled by :func:`kernel_diagnostics`.
    """

    system: EllipticSystem
    mode: str = "auto"
    angles: int = 256
    normalization_defect: float | None = None
    decay_constant: float | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mode == "auto":
            self.mode = "closed-form" if _is_laplacian(self.system) else "spectral"
        if self.mode == "closed-form" and not _is_laplacian(self.system):
            raise ValueError("closed-form kernel exists only for the Laplacian")
        if self.system.n not in (2, 3):
            raise ValueError("kernels are implemented for n in (2, 3)")

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def M(self) -> int:
        return self.system.M

    def symbol(self, xi, t: float) -> np.ndarray:
        return spectral_symbol(self.system, xi, t)

    # directional solvents -------------------------------------------------
    def _solvents_2d(self):
        if "pm" not in self._cache:
            self._cache["pm"] = (solvent(self.system, [1.0]), solvent(self.system, [-1.0]))
        return self._cache["pm"]

    def _solvents_3d(self, k: int):
        key = ("ring", k)
        if key not in self._cache:
            th = 2 * pi * np.arange(k) / k
            dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
            Ns = np.stack([solvent(self.system, d) for d in dirs])
            self._cache[key] = (dirs, Ns)
        return self._cache[key]

    def _finish(self, v: np.ndarray) -> np.ndarray:
        return v.real.copy() if self.system.is_real else v

    # evaluation -------------------------------------------------------------
    def __call__(self, x, t) -> np.ndarray:
        """Kernel matrix P_t(x) with shape broadcast(x, t) + (M, M)."""
        x, t = self._prep(x, t)
        if self.mode == "closed-form":
            c = gamma(self.n / 2) / pi ** (self.n / 2)
            r2 = np.sum(x**2, axis=-1)
            return (c * t * (t**2 + r2) ** (-self.n / 2))[..., None, None]
        I = np.eye(self.M)
        if self.n == 2:
            Np, Nm = self._solvents_2d()
            z = x[..., 0][..., None, None]
            tt = t[..., None, None]
            out = np.linalg.inv(tt * Np + z * I) + np.linalg.inv(tt * Nm - z * I)
            return self._finish(1j / (2 * pi) * out)
        dirs, Ns = self._ring_for(x, t)
        proj = (x @ dirs.T)[..., None, None]
        C = np.linalg.inv(t[..., None, None, None] * Ns + proj * I)
        out = -np.mean(C @ C, axis=-3) * (2 * pi) / (4 * pi**2)
        return self._finish(out)

    def grad(self, x, t) -> np.ndarray:
        """Gradient of P_t(x) in (x_1, ..., x_{n-1}, t); shape (..., n, M, M)."""
        x, t = self._prep(x, t)
        n = self.n
        if self.mode == "closed-form":
            c = gamma(n / 2) / pi ** (n / 2)
            r2 = np.sum(x**2, axis=-1)
            q = t**2 + r2
            dx = -n * c * t[..., None] * x * q[..., None] ** (-n / 2 - 1)
            dt = c * (q - n * t**2) * q ** (-n / 2 - 1)
            return np.concatenate([dx, dt[..., None]], axis=-1)[..., None, None]
        I = np.eye(self.M)
        if n == 2:
            Np, Nm = self._solvents_2d()
            z = x[..., 0][..., None, None]
            tt = t[..., None, None]
            Rp = np.linalg.inv(tt * Np + z * I)
            Rm = np.linalg.inv(tt * Nm - z * I)
            Rp2, Rm2 = Rp @ Rp, Rm @ Rm
            dz = 1j / (2 * pi) * (-Rp2 + Rm2)
            dt = 1j / (2 * pi) * (-(Np @ Rp2) - (Nm @ Rm2))
            return self._finish(np.stack([dz, dt], axis=-3))
        dirs, Ns = self._ring_for(x, t)
        proj = (x @ dirs.T)[..., None, None]
        C = np.linalg.inv(t[..., None, None, None] * Ns + proj * I)
        C3 = C @ C @ C
        w = 2.0 / (4 * pi**2) * (2 * pi)
        dxs = [w * np.mean(dirs[:, j][:, None, None] * C3, axis=-3) for j in range(2)]
        dt = w * np.mean(Ns @ C3, axis=-3)
        return self._finish(np.stack(dxs + [dt], axis=-3))

    def _ring_for(self, x, t):
        # the theta-integrand peaks with width ~ t/|x|; resolve it
        ratio = float(np.max(np.linalg.norm(x, axis=-1) / t)) if x.size else 0.0
        k = self.angles
        while k < 32 * ratio:
            k *= 2
        return self._solvents_3d(k)

    def _prep(self, x, t):
        x = np.asarray(x, dtype=float)
        if self.n == 2 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ValueError("kernel evaluation needs t > 0")
        shape = np.broadcast_shapes(x.shape[:-1], t.shape)
        return np.broadcast_to(x, shape + (self.n - 1,)), np.broadcast_to(t, shape)


# ---------------------------------------------------------------------------
# lattice kernels


@dataclass
class KernelGrid:
    t: float
    dx: float
    coords: np.ndarray  # 1-D coordinate vector per axis (centered)
    values: np.ndarray  # (N,)*(n-1) + (M, M)
    rim: float
    aliasing_bound: float

    @property
    def integral(self) -> np.ndarray:
        axes = tuple(range(self.values.ndim - 2))
        return np.sum(self.values, axis=axes) * self.dx ** len(axes)


def _default_lattice(n: int) -> tuple[float, int]:
    return (1.0 / 16, 2**15) if n == 2 else (1.0 / 8, 2**8)


def expm_batch(A: np.ndarray, order: int = 14) -> np.ndarray:
    """Matrix exponential of a stack (..., M, M) by scaling and squaring.

    Each matrix gets its own number of squarings, so small and large
    frequencies are both treated at full accuracy.
    """
    A = np.asarray(A, dtype=complex)
    flat = A.reshape(-1, *A.shape[-2:])
    out = np.empty_like(flat)
    norms = np.abs(flat).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore"):
        squarings = np.maximum(0, np.ceil(np.log2(norms / 0.25))).astype(int)
    eye = np.eye(A.shape[-1])
    for j in np.unique(squarings):
        idx = np.flatnonzero(squarings == j)
        X = flat[idx] / 2.0**j
        term = np.broadcast_to(eye, X.shape).astype(complex)
        acc = term.copy()
        for k in range(1, order + 1):
            term = term @ X / k
            acc = acc + term
        for _ in range(j):
            acc = acc @ acc
        out[idx] = acc
    return out.reshape(A.shape)


def symbol_lattice(K: PoissonKernel, t: float, dx: float, size: int) -> np.ndarray:
    """P^ on the FFT frequency lattice, shape (size,)*(n-1) + (M, M)."""
    n, M = K.n, K.M
    f = 2 * pi * np.fft.fftfreq(size, dx)
    grids = np.meshgrid(*([f] * (n - 1)), indexing="ij")
    xi = np.stack(grids, axis=-1).reshape(-1, n - 1)
    r = np.linalg.norm(xi, axis=-1)
    out = np.empty((xi.shape[0], M, M), dtype=complex)
    if K.mode == "closed-form":
        out[:] = np.exp(-t * r)[:, None, None]
    else:
        out[r == 0] = np.eye(M)
        live = np.flatnonzero(r > 0)
        if n == 2:
            # only two directions; every frequency on a ray shares U and T
            for sgn in (1.0, -1.0):
                idx = live[np.sign(xi[live, 0]) == sgn]
                U, T = stable_factor(K.system, [sgn])
                out[idx] = U @ expm_batch(1j * t * r[idx, None, None] * T[None]) @ np.linalg.inv(U)
        else:
            Us = np.empty((len(live), M, M), dtype=complex)
            Ts = np.empty_like(Us)
            for j, i in enumerate(live):
                Us[j], Ts[j] = stable_factor(K.system, xi[i] / r[i])
            out[live] = Us @ expm_batch(1j * t * r[live, None, None] * Ts) @ np.linalg.inv(Us)
    return out.reshape((size,) * (n - 1) + (M, M))


def kernel_grid(K: PoissonKernel, t: float, dx: float | None = None, size: int | None = None) -> KernelGrid:
    """Sample P_t on a centered lattice by inverse FFT of the symbol.

    Raises KernelError if the symbol has not decayed below 1e-8 on the
    frequency rim, i.e. the lattice is too coarse for this height.
    """
    if t <= 0:
        raise ValueError("kernel_grid needs t > 0")
    d0, s0 = _default_lattice(K.n)
    dx = d0 if dx is None else dx
    size = s0 if size is None else size
    hat = symbol_lattice(K, t, dx, size)
    axes = tuple(range(K.n - 1))
    rim_mask = np.zeros((size,) * (K.n - 1), dtype=bool)
    for ax in axes:
        sl = [slice(None)] * (K.n - 1)
        sl[ax] = size // 2
        rim_mask[tuple(sl)] = True
    rim = float(np.max(np.abs(hat[rim_mask])))
    if rim > RIM_TOL:
        raise KernelError(f"symbol is {rim:.2e} on the frequency rim at t={t}; refine dx")
    vals = np.fft.fftshift(np.fft.ifftn(hat, axes=axes), axes=axes) / dx ** (K.n - 1)
    vals = vals.real if K.system.is_real else vals
    coords = (np.arange(size) - size // 2) * dx
    # periodic images: sum over k != 0 of c_n t |kL|^-n, lattice sums pi^2/3 and 9.0336
    L = size * dx
    images = np.pi**2 / 3 if K.n == 2 else 9.0336
    alias = float(gamma(K.n / 2) / pi ** (K.n / 2) * t * images * L ** (-K.n) + rim)
    return KernelGrid(t, dx, coords, vals, rim, alias)


# ---------------------------------------------------------------------------
# diagnostics


def _fd_weights(order: int):
    if order == 2:
        return np.array([-1, 0, 1]) / 2, np.array([1, -2, 1])
    return np.array([1, -8, 0, 8, -1]) / 12, np.array([-1, 16, -30, 16, -1]) / 12


def pde_residual(K: PoissonKernel, h: float, order: int = 4, box=None) -> float:
    """sup |L P| over an interior box by centered finite differences of the evaluator.

    The operator acts on each kernel column; ``box`` is
    ((x_lo, x_hi),)*(n-1) + ((t_lo, t_hi),).
    """
    n, a = K.n, K.system.coeff
    if box is None:
        box = ((-1.0, 1.0),) * (n - 1) + ((0.5, 1.5),)
    first, second = _fd_weights(order)
    w = len(first) // 2
    axes = [lo + h * np.arange(-w, int(round((hi - lo) / h)) + w + 1) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    P = K(np.stack(mesh[:-1], axis=-1), mesh[-1])
    full = P.shape[:n]
    total = 0
    for j in range(n):
        for k in range(n):
            if j == k:
                D = _stencil(P, second, j, h**2)
            else:
                D = _stencil(_stencil(P, first, k, h), first, j, h)
            D = _interior(D, full, w)
            total = total + np.einsum("ab,...bc->...ac", a[j, k], D)
    return float(np.max(np.abs(total)))


def _stencil(P: np.ndarray, weights: np.ndarray, axis: int, scale: float) -> np.ndarray:
    """Apply a centered stencil along ``axis``; that axis shrinks by the stencil width."""
    w = len(weights) // 2
    m = P.shape[axis]
    out = 0
    for i, c in enumerate(weights):
        if c:
            sl = [slice(None)] * P.ndim
            sl[axis] = slice(i, m - 2 * w + i)
            out = out + c * P[tuple(sl)]
    return out / scale


def _interior(D: np.ndarray, full: tuple, w: int) -> np.ndarray:
    sl = [slice(None)] * D.ndim
    for ax, m in enumerate(full):
        if D.shape[ax] == m:
            sl[ax] = slice(w, m - w)
    return D[tuple(sl)]


@dataclass
class KernelReport:
    label: str
    normalization_defect: dict
    decay_exponent: float
    decay_constant: float
    pde_residual: float
    pde_residual_order2: tuple[float, float]
    pde_order2_ratio: float

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "normalization_defect": {f"{k:g}": v for k, v in self.normalization_defect.items()},
            "decay_exponent": self.decay_exponent,
            "decay_constant": self.decay_constant,
            "pde_residual": self.pde_residual,
            "pde_residual_order2": list(self.pde_residual_order2),
            "pde_order2_ratio": self.pde_order2_ratio,
        }


def envelope(K: PoissonKernel, part: str = "value") -> float:
    """Smallest C with |D(x)| <= C (1+|x|^2)^(-p) on sampled x, at height one.

    ``part`` selects D: "value" is P (p = n/2), "tangential" the x-gradient
    of P (p = (n+1)/2) and "normal" the t-derivative of P (p = n/2).  The
    sample covers radii 2^-6 .. 2^12 in several directions.
    """
    powers = {"value": K.n / 2, "tangential": (K.n + 1) / 2, "normal": K.n / 2}
    if part not in powers:
        raise ValueError(f"unknown envelope part {part!r}")
    key = ("envelope", part)
    if key in K._cache:
        return K._cache[key]
    radii = 2.0 ** np.linspace(-6, 12, 145)
    n_dir = 1 if K.n == 2 else 8
    worst = 0.0
    for sgn in (1.0, -1.0):
        for k in range(n_dir):
            x = np.zeros((len(radii) + 1, K.n - 1))
            x[1:, 0] = sgn * radii * np.cos(np.pi * k / n_dir)
            if K.n == 3:
                x[1:, 1] = sgn * radii * np.sin(np.pi * k / n_dir)
            r2 = np.sum(x**2, axis=-1)
            ones = np.ones(len(x))
            if part == "value":
                v = K(x, ones)[..., None, :, :]
            elif part == "tangential":
                v = K.grad(x, ones)[..., :-1, :, :]
            else:
                v = K.grad(x, ones)[..., -1:, :, :]
            size = np.max(np.linalg.norm(v, ord=2, axis=(-2, -1)), axis=-1)
            worst = max(worst, float(np.max(size * (1 + r2) ** powers[part])))
    K._cache[key] = worst
    return worst


def normal_derivative_is_even(K: PoissonKernel, samples: int = 64, seed: int = 0) -> bool:
    """Whether d_t P(-x, 1) = d_t P(x, 1) on seeded samples (true for reflection-symmetric systems)."""
    key = ("even", samples, seed)
    if key not in K._cache:
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(samples, K.n - 1)) * 2.0 ** rng.uniform(-3, 5, (samples, 1))
        ones = np.ones(samples)
        a = K.grad(x, ones)[:, -1]
        b = K.grad(-x, ones)[:, -1]
        K._cache[key] = bool(np.max(np.abs(a - b)) <= 1e-10 * max(1.0, float(np.max(np.abs(a)))))
    return K._cache[key]


def decay_fit(K: PoissonKernel, radii=None) -> tuple[float, float]:
    """Least-squares exponent and constant of |P(x, 1)| ~ C (1 + |x|^2)^p."""
    if radii is None:
        radii = 2.0 ** np.linspace(2, 6, 33)
    x = np.zeros((len(radii), K.n - 1))
    x[:, 0] = radii
    vals = np.linalg.norm(K(x, np.ones(len(radii))), ord=2, axis=(-2, -1))
    A = np.stack([np.log1p(radii**2), np.ones_like(radii)], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.log(vals), rcond=None)
    return float(coef[0]), envelope(K)


def kernel_diagnostics(K: PoissonKernel, t_list=(0.5, 1.0, 2.0), h: float | None = None) -> KernelReport:
    """Normalization per height, decay fit, and finite-difference PDE residual."""
    defects = {}
    for t in t_list:
        g = kernel_grid(K, t)
        defects[float(t)] = float(np.max(np.abs(g.integral - np.eye(K.M))))
    expo, C = decay_fit(K)
    if h is None:
        h = 2.0**-8 if K.n == 2 else 2.0**-4
    box = None if K.n == 2 else ((-0.5, 0.5), (-0.5, 0.5), (0.75, 1.25))
    res4 = pde_residual(K, h, 4, box)
    r_h = pde_residual(K, h, 2, box)
    r_2h = pde_residual(K, 2 * h, 2, box)
    K.normalization_defect = max(defects.values())
    K.decay_constant = C
    return KernelReport(K.system.label, defects, expo, C, res4, (r_h, r_2h), r_2h / r_h if r_h > 0 else np.inf)
