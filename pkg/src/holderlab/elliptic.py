"""Constant-coefficient second-order systems in the upper half-space.

The coefficient tensor is stored as ``coeff[j, k, alpha, beta]`` with shape
(n, n, M, M); the operator acts as
(Lu)^alpha = sum d_j (a_{jk}^{alpha beta} d_k u^beta).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

DEFAULT_SAMPLES = 200_000
REFINE_ITERATIONS = 50


@dataclass(frozen=True)
class EllipticSystem:
    n: int
    M: int
    coeff: np.ndarray
    label: str = "system"

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coeff.imag == 0))


@dataclass(frozen=True)
class SymbolPencil:
    """A2 tau^2 + A1 tau + A0 for a fixed tangential frequency."""

    A0: np.ndarray
    A1: np.ndarray
    A2: np.ndarray

    def __call__(self, tau: complex) -> np.ndarray:
        return self.A2 * tau**2 + self.A1 * tau + self.A0


def make_system(n: int, M: int, coeff, label: str = "tensor") -> EllipticSystem:
    """Store ``coeff`` verbatim (no symmetrisation) after shape and finiteness checks."""
    if n < 2 or M < 1:
        raise ValueError(f"need n >= 2 and M >= 1, got n={n}, M={M}")
    a = np.array(coeff, dtype=complex)
    if a.shape != (n, n, M, M):
        raise ValueError(f"coefficient tensor has shape {a.shape}, expected {(n, n, M, M)}")
    if not np.all(np.isfinite(a)):
        raise ValueError("coefficient tensor has non-finite entries")
    a.setflags(write=False)
    return EllipticSystem(n, M, a, label)


def make_laplacian(n: int) -> EllipticSystem:
    return make_system(n, 1, np.eye(n)[:, :, None, None], f"laplacian(n={n})")


def make_scalar_div(A) -> EllipticSystem:
    """Scalar operator div(A grad u) for an n x n matrix A."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    return make_system(n, 1, A[:, :, None, None], "scalar-divA")


def make_lame(n: int, mu: complex, lam: complex) -> tuple[EllipticSystem, bool]:
    """Lame system mu Laplacian + (lambda + mu) grad div, with its admissibility flag.

    Tensor placement a_{jk}^{ab} = mu d_jk d_ab + (lam + mu) d_ja d_kb.
    """
    eye = np.eye(n)
    a = mu * np.einsum("jk,ab->jkab", eye, eye) + (lam + mu) * np.einsum("ja,kb->jkab", eye, eye)
    ok = (complex(mu).real > 0) and (complex(2 * mu + lam).real > 0)
    return make_system(n, n, a, f"lame(n={n},mu={mu},lambda={lam})"), ok


def _form(a: np.ndarray, xi: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Re[a_{jk}^{ab} xi_j xi_k conj(zeta_a) zeta_b] for batches of (xi, zeta)."""
    return np.einsum("jkab,pj,pk,pa,pb->p", a, xi, xi, zeta.conj(), zeta, optimize=True).real


def _unit_normals(z: np.ndarray) -> np.ndarray:
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _gauge(zeta: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest coordinate is real positive."""
    idx = np.argmax(np.abs(zeta), axis=1)
    ph = zeta[np.arange(len(zeta)), idx]
    return zeta * (np.abs(ph) / ph)[:, None]


def ellipticity_constant(L: EllipticSystem, samples: int = DEFAULT_SAMPLES, refine: bool = True, seed: int = 0) -> float:
    """Minimise the Legendre-Hadamard form over unit real xi and unit complex zeta.

    Sobol points mapped to Gaussians give quasi-uniform directions on both
    spheres; the best candidates are then polished by coordinate descent.
    The return value is the smallest value found, so it can only overshoot
    the true minimum; its sign is the verdict.
    """
    n, M = L.n, L.M
    dim = n + 2 * M
    m = int(np.ceil(np.log2(max(samples, 2))))
    pts = qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)[:samples]
    z = ndtri(np.clip(pts, 1e-12, 1 - 1e-12))
    xi = _unit_normals(z[:, :n])
    zeta = _unit_normals(z[:, n : n + M] + 1j * z[:, n + M :])
    vals = np.empty(len(xi))
    for i in range(0, len(xi), 20_000):
        vals[i : i + 20_000] = _form(L.coeff, xi[i : i + 20_000], zeta[i : i + 20_000])
    best = float(vals.min())
    if not refine:
        return best
    top = np.argsort(vals)[:8]
    for i in top:
        best = min(best, _descend(L.coeff, xi[i], _gauge(zeta[i : i + 1])[0]))
    return best


def _pack(xi, zeta):
    return np.concatenate([xi, zeta.real, zeta.imag])


def _unpack(v, n, M):
    xi = v[:n]
    zeta = v[n : n + M] + 1j * v[n + M :]
    return xi / np.linalg.norm(xi), zeta / np.linalg.norm(zeta)


def _descend(a: np.ndarray, xi: np.ndarray, zeta: np.ndarray) -> float:
    """Coordinate descent with a shrinking step on the product of spheres."""
    n, M = xi.size, zeta.size
    v = _pack(xi, zeta)

    def f(v):
        x, z = _unpack(v, n, M)
        return float(_form(a, x[None], z[None])[0])

    cur = f(v)
    step = 0.1
    for _ in range(REFINE_ITERATIONS):
        improved = False
        for c in range(v.size):
            for sgn in (1.0, -1.0):
                trial = v.copy()
                trial[c] += sgn * step
                val = f(trial)
                if val < cur:
                    v, cur, improved = trial, val, True
                    break
        if not improved:
            step *= 0.5
        x, z = _unpack(v, n, M)
        v = _pack(x, _gauge(z[None])[0])
    return cur


def symbol_pencil(L: EllipticSystem, xi) -> SymbolPencil:
    """Freeze the tangential frequency; the last coordinate is the normal one."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (L.n - 1,):
        raise ValueError(f"tangential frequency must have {L.n - 1} components")
    a = L.coeff
    m = L.n - 1
    A2 = a[m, m].copy()
    A1 = np.einsum("jab,j->ab", a[:m, m] + a[m, :m], xi)
    A0 = np.einsum("jkab,j,k->ab", a[:m, :m], xi, xi)
    return SymbolPencil(A0, A1, A2)
