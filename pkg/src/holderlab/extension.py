"""Convolution solutions u = P_t * f, their gradients and square functionals.

With the substitution y = x - t z the solution reads

    u(x, t) = int P(z, 1) f(x - t z) dz,
    grad u(x, t) = t^-1 int G(z) (f(x - t z) - f(x)) dz,

where G = (d_z P, d_t P) at height one integrates to zero.  The integrals
are truncated at |z| <= R with R chosen from an analytic tail bound; the
truncated part is integrated by Gauss panels that are dyadic in |z|,
split (and graded) at the kinks of f, and refined to resolve oscillation.

Two tail bounds are used.  By default the declared modulus of f bounds
the oscillation |f(x - tz) - f(x)| <= A omega(t|z|), and the integrand with
f(x) subtracted is truncated.  Data that declare a bounded antiderivative
along x_1 (oscillating data such as cos x) use integration by parts
instead, which bounds the plain tail int_{|z|>R} K(z) f(x - tz) dz by
2 B sup_{|z|>R} |K| / t; then the plain integrand is truncated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import growthfn as gf
from .poisson import PoissonKernel, envelope, normal_derivative_is_even
from .quadrature import LOG2, gauss_legendre, geometric_tail, graded_panel_rule, split_blocks

EXTEND_TOL = 1e-6
GRADIENT_TOL = 1e-5
MIN_RADIUS_EXP = 4
MAX_DOUBLINGS = 40
PANEL_ORDER = 16
WAVES_PER_PANEL = 2  # 16 Gauss nodes resolve two periods to ~1e-10
FLOOR_EXP = -6  # smallest dyadic panel edge 2^-6 around z = 0
PHI_NODES = 128
LOG_PANEL_NODES = 8
SLICE_PANEL_NODES = 12  # Gauss nodes per radial slice panel
SLICE_ANGLES = 16
DYADIC_PANEL_NODES = 6  # Gauss nodes per dyadic panel in log s
CONE_PANELS = 20  # dyadic panels below ell: heights down to 2^-20 ell


class ExtensionError(ValueError):
    """The tail bound never met the tolerance: datum and modulus are inadmissible."""


# ---------------------------------------------------------------------------
# boundary data


@dataclass(frozen=True)
class BoundaryDatum:
    """Vector-valued boundary datum with a declared modulus bound.

    |f(x) - f(y)| <= A omega(|x - y|).  ``breakpoints`` are kink locations
    along x_1, ``wavelength`` the oscillation length (if any), and
    ``antiderivative_bound`` a bound for an antiderivative in x_1 and
    ``second_difference_bound`` a constant A2 with
    |f(x+h) + f(x-h) - 2 f(x)| <= A2 omega(|h|) (zero for affine data).
    """

    func: Callable[[np.ndarray], np.ndarray]
    n: int
    M: int
    modulus: gf.GrowthFunction
    A: float
    label: str
    breakpoints: tuple[float, ...] = ()
    wavelength: float | None = None
    antiderivative_bound: float | None = None
    second_difference_bound: float | None = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.func(x))
        if self.M == 1 and out.shape == x.shape[:-1]:
            out = out[..., None]
        return out

    def scaled(self, c: float) -> "BoundaryDatum":
        f = self.func
        B = None if self.antiderivative_bound is None else abs(c) * self.antiderivative_bound
        A2 = None if self.second_difference_bound is None else abs(c) * self.second_difference_bound
        return BoundaryDatum(
            lambda x: c * f(x), self.n, self.M, self.modulus, abs(c) * self.A, f"{c:g}*{self.label}",
            self.breakpoints, self.wavelength, B, A2,
        )


def check_modulus(f: BoundaryDatum, pairs: int = 10_000, seed: int = 0, slack: float = 1.01) -> tuple[float, bool]:
    """Largest |f(x) - f(y)| / (A omega(|x - y|)) over seeded pairs at many scales."""
    rng = np.random.default_rng(seed)
    d = f.n - 1
    x = rng.choice([-1.0, 1.0], (pairs, d)) * 2.0 ** rng.uniform(-10, 10, (pairs, d))
    step = rng.normal(size=(pairs, d))
    step *= (2.0 ** rng.uniform(-20, 12, pairs) / np.linalg.norm(step, axis=1))[:, None]
    y = x + step
    num = np.linalg.norm(f(x) - f(y), axis=-1)
    if f.A == 0:
        worst = float(np.max(num))
        return worst, worst == 0.0
    den = f.A * f.modulus(np.linalg.norm(step, axis=1))
    worst = float(np.max(num / den))
    return worst, worst <= slack


def _x1(x):
    return x[..., 0]


def datum_catalog(name: str, n: int = 2, **params) -> BoundaryDatum:
    """Catalog data; every entry depends on x_1 only.

    constant(c), cos, sqrt-abs, signed-sqrt, sqrt-diff, log1p-abs, linear,
    logplus-x1, vector-cos.
    """
    root = gf.catalog("power", alpha=0.5)
    cos_mod = gf.GrowthFunction(lambda t: np.minimum(t, 2.0), "min(t,2)", {}, (2.0,))
    log_mod = gf.GrowthFunction(np.log1p, "log(1+t)")
    if name == "constant":
        c = float(params.get("c", 1.0))
        return BoundaryDatum(lambda x: np.full(x.shape[:-1], c), n, 1, root, 0.0, f"constant({c:g})")
    if name == "cos":
        return BoundaryDatum(lambda x: np.cos(_x1(x)), n, 1, cos_mod, 1.0, "cos", (), 2 * np.pi, 1.0)
    if name == "vector-cos":
        def vec(x):
            out = np.zeros(x.shape[:-1] + (2,))
            out[..., 0] = np.cos(_x1(x))
            return out

        return BoundaryDatum(vec, n, 2, cos_mod, 1.0, "(cos,0)", (), 2 * np.pi, 1.0)
    if name == "sqrt-abs":
        return BoundaryDatum(lambda x: np.sqrt(np.abs(_x1(x))), n, 1, root, 1.0, "|x|^1/2", (0.0,))
    if name == "signed-sqrt":
        return BoundaryDatum(
            lambda x: np.sign(_x1(x)) * np.sqrt(np.abs(_x1(x))), n, 1, root, np.sqrt(2.0), "sgn(x)|x|^1/2", (0.0,)
        )
    if name == "sqrt-diff":
        return BoundaryDatum(
            lambda x: np.sqrt(np.abs(_x1(x) - 1)) - np.sqrt(np.abs(_x1(x) + 1)),
            n, 1, root, 2.0, "|x-1|^1/2-|x+1|^1/2", (-1.0, 1.0),
        )
    if name == "log1p-abs":
        return BoundaryDatum(lambda x: np.log1p(np.abs(_x1(x))), n, 1, log_mod, 1.0, "log(1+|x|)", (0.0,))
    if name == "linear":
        return BoundaryDatum(lambda x: _x1(x) * 1.0, n, 1, gf.linear(), 1.0, "x1", second_difference_bound=0.0)
    if name == "logplus-x1":
        def logplus(x):
            with np.errstate(divide="ignore"):
                return np.maximum(0.0, np.log(np.abs(_x1(x))))

        return BoundaryDatum(logplus, n, 1, log_mod, 1.0, "log+|x1|", (-1.0, 1.0))
    raise ValueError(f"unknown datum {name!r}")


DATUM_NAMES = (
    "constant", "cos", "vector-cos", "sqrt-abs", "signed-sqrt", "sqrt-diff", "log1p-abs", "linear", "logplus-x1",
)


# ---------------------------------------------------------------------------
# truncation radius


def _sphere(n: int) -> float:
    return 2.0 if n == 2 else 2 * np.pi


def _start_exp(t: float) -> int:
    """First radius exponent: |z| >= 2^4 and |y - x| = t |z| >= 2^4."""
    return MIN_RADIUS_EXP + max(0, int(np.ceil(-np.log2(t))))


def _radii(t: float) -> np.ndarray:
    return 2.0 ** (_start_exp(t) + np.arange(MAX_DOUBLINGS + 1))


def _modulus_tails(f: BoundaryDatum, t: float, n: int, power: float) -> np.ndarray:
    """int_R^inf omega(t r) (1+r^2)^(-power) r^(n-2) dr for each R in _radii(t)."""
    n_blocks = MAX_DOUBLINGS + 60
    k = np.arange(n_blocks) + _start_exp(t)
    u, w = split_blocks(k * LOG2, (k + 1) * LOG2, [], 16, graded=False)
    r = np.exp(u)
    vals = f.modulus(t * r) * (1 + r * r) ** (-power) * r ** (n - 1)
    blocks = np.sum(vals * w, axis=-1)
    # extrapolated remainder past the last block, then suffix sums
    rest, _ = geometric_tail(blocks[-3:], rtol=1.0, check_at=3)
    rest = rest - blocks[-3:].sum()
    suffix = np.cumsum(blocks[::-1])[::-1] + rest
    return suffix[: MAX_DOUBLINGS + 1]


def _tail_bounds(K: PoissonKernel, f: BoundaryDatum, t: float, grad: bool) -> np.ndarray:
    """Analytic bound of the neglected |z| > R part for each R in _radii(t)."""
    n = K.n
    radii = _radii(t)
    if f.antiderivative_bound is not None and n == 2:
        # one integration by parts in z_1: boundary terms plus the |K'| tail
        C = max(envelope(K, "tangential"), envelope(K, "normal")) if grad else envelope(K)
        bound = 4 * f.antiderivative_bound * C * (1 + radii**2) ** (-n / 2) / t
        return bound / t if grad else bound
    S = _sphere(n)
    if not grad:
        return f.A * envelope(K) * S * _modulus_tails(f, t, n, n / 2)
    tangential = f.A * envelope(K, "tangential") * S * _modulus_tails(f, t, n, (n + 1) / 2)
    # the normal derivative is even in z, so only the even part of f - f(x) survives
    A_normal = f.A
    if f.second_difference_bound is not None and normal_derivative_is_even(K):
        A_normal = 0.5 * f.second_difference_bound
    normal = A_normal * envelope(K, "normal") * S * _modulus_tails(f, t, n, n / 2) if A_normal else 0.0
    return (tangential + normal) / t


def truncation_radius(K: PoissonKernel, f: BoundaryDatum, t: float, tol: float, grad: bool) -> tuple[float, float]:
    """Smallest R on the doubling ladder whose tail bound is below tol; returns (R, bound).

    The ladder starts at 2^4 max(1, 1/t) (rounded up to a power of two) and
    doubles at most 40 times.
    """
    radii = _radii(t)
    if f.A == 0:
        return float(radii[0]), 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        bound = np.nan_to_num(_tail_bounds(K, f, t, grad), nan=np.inf)
    ok = np.flatnonzero(bound <= tol)
    if ok.size == 0:
        raise ExtensionError(
            f"tail bound for {f.label} at t={t:g} stays at {bound[-1]:.3g} > {tol:g} after {MAX_DOUBLINGS} doublings"
        )
    return float(radii[ok[0]]), float(bound[ok[0]])


# ---------------------------------------------------------------------------
# quadrature rules in z


def _base_edges(R: float, t: float, wavelength: float | None) -> np.ndarray:
    top = int(np.ceil(np.log2(R)))
    pos = 2.0 ** np.arange(FLOOR_EXP, top + 1)
    pos = np.append(pos[pos < R], R)
    edges = np.concatenate([-pos[::-1], [0.0], pos])
    if wavelength is not None:
        width = WAVES_PER_PANEL * wavelength / t
        pieces = np.maximum(1, np.ceil(np.diff(edges) / width).astype(int))
        seg = np.repeat(np.arange(len(pieces)), pieces)
        frac = (np.arange(len(seg)) - np.repeat(np.cumsum(pieces) - pieces, pieces)) / pieces[seg]
        edges = np.append(edges[seg] + frac * np.diff(edges)[seg], edges[-1])
    return edges


def _line_rule(f: BoundaryDatum, x1: np.ndarray, t: float, R: float):
    """Nodes and weights in z, shape (P or 1, N)."""
    base = _base_edges(R, t, f.wavelength)
    if not f.breakpoints:
        y, w = gauss_legendre(PANEL_ORDER)
        a, h = base[:-1, None], np.diff(base)[:, None]
        return (a + h * y).reshape(1, -1), (h * w).reshape(1, -1)
    cuts = np.clip((x1[:, None] - np.asarray(f.breakpoints)[None, :]) / t, -R, R)
    # a kink just outside an ungraded panel ruins it: snap nearby edges onto the kink
    width = np.maximum(np.abs(base) / 2, 2.0**FLOOR_EXP)
    gap = np.abs(base[None, :, None] - cuts[:, None, :])
    near = np.argmin(gap, axis=-1)
    snap = np.take_along_axis(gap, near[..., None], -1)[..., 0] < width / 4
    moved = np.where(snap, np.take_along_axis(cuts, near, 1), base[None, :])
    edges = np.sort(np.concatenate([moved, cuts], axis=1), axis=1)
    at_cut = np.any(edges[:, :, None] == cuts[:, None, :], axis=-1)
    return graded_panel_rule(edges, at_cut[:, :-1], at_cut[:, 1:], PANEL_ORDER)


def _disc_rule(R: float):
    """Polar rule on the disc |z| < R: nodes (N, 2), weights (N,)."""
    top = int(np.ceil(np.log2(R)))
    pos = 2.0 ** np.arange(FLOOR_EXP, top + 1)
    edges = np.concatenate([[0.0], pos[pos < R], [R]])
    y, w = gauss_legendre(PANEL_ORDER)
    r = (edges[:-1, None] + np.diff(edges)[:, None] * y).ravel()
    wr = (np.diff(edges)[:, None] * w).ravel() * r
    phi = 2 * np.pi * (np.arange(PHI_NODES) + 0.5) / PHI_NODES
    z = np.stack([np.outer(r, np.cos(phi)), np.outer(r, np.sin(phi))], axis=-1).reshape(-1, 2)
    return z, np.repeat(wr, PHI_NODES) * (2 * np.pi / PHI_NODES)


# ---------------------------------------------------------------------------
# convolution


@dataclass
class ExtensionResult:
    values: np.ndarray  # (P, M) for u, (P, n, M) for grad u
    budget: np.ndarray  # (P,) analytic tail bound per point
    radius: np.ndarray  # (P,) truncation radius in z
    fd_flag: np.ndarray | None = None


def _check(K: PoissonKernel, f: BoundaryDatum, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != K.n:
        raise ValueError(f"points need {K.n} coordinates (x', t)")
    if f.n != K.n or f.M != K.M:
        raise ValueError("datum and kernel dimensions differ")
    if np.any(pts[:, -1] <= 0):
        raise ValueError("extension is defined for t > 0; use trace_probe for boundary values")
    if K.n == 3 and K.mode != "closed-form":
        raise NotImplementedError("n=3 extension is implemented for the closed-form Laplacian kernel")
    return pts


def _convolve(
    K: PoissonKernel, f: BoundaryDatum, points, tol: float, grad: bool, y_radius=None
) -> ExtensionResult:
    pts = _check(K, f, points)
    P, n, M = len(pts), K.n, K.M
    x, t_all = pts[:, :-1], pts[:, -1]
    out = np.zeros((P, n, M) if grad else (P, M), dtype=complex)
    budget = np.zeros(P)
    radius = np.zeros(P)
    plain = f.antiderivative_bound is not None and n == 2
    for t in np.unique(t_all):
        idx = np.flatnonzero(t_all == t)
        if y_radius is None:
            R, bound = truncation_radius(K, f, t, tol, grad)
        else:
            R, bound = float(np.max(np.asarray(y_radius)[idx])) / t, np.nan
        budget[idx], radius[idx] = bound, R
        if n == 2:
            z_all, w_all = _line_rule(f, x[idx, 0], t, R)
        else:
            z_all, w_all = _disc_rule(R)
        nodes = z_all.shape[-1] if n == 2 else len(z_all)
        chunk = max(1, int(4e6 // (nodes * n * M * M)))
        shared = n == 3 or z_all.shape[0] == 1
        if shared:
            zz = z_all.reshape(-1, n - 1) if n == 3 else z_all.reshape(-1, 1)
            kern = K.grad(zz, 1.0) if grad else K(zz, 1.0)
        for s in range(0, len(idx), chunk):
            sub = idx[s : s + chunk]
            if shared:
                zs = zz[None]
                ws = w_all.reshape(1, -1)
                ks = kern[None]
            else:
                zs = z_all[s : s + chunk, :, None]
                ws = w_all[s : s + chunk]
                ks = K.grad(zs, 1.0) if grad else K(zs, 1.0)
            fy = f(x[sub, None, :] - t * zs)  # (p, N, M)
            if plain:
                diff = fy
            else:
                diff = fy - f(x[sub])[:, None, :]
            if grad:
                val = np.einsum("pk,pkjab,pkb->pja", np.broadcast_to(ws, fy.shape[:2]), np.broadcast_to(ks, fy.shape[:2] + ks.shape[-3:]), diff) / t
            else:
                val = np.einsum("pk,pkab,pkb->pa", np.broadcast_to(ws, fy.shape[:2]), np.broadcast_to(ks, fy.shape[:2] + ks.shape[-2:]), diff)
                if not plain:
                    val = val + f(x[sub])
            out[sub] = val
    if K.system.is_real and np.isrealobj(f(pts[:1, :-1])):
        out = out.real
    return ExtensionResult(out, budget, radius)


def extend(K: PoissonKernel, f: BoundaryDatum, points, tol: float = EXTEND_TOL) -> ExtensionResult:
    """u(x', t) at each row (x', t) of ``points``, with per-point tail budgets."""
    return _convolve(K, f, points, tol, grad=False)


def gradient(K: PoissonKernel, f: BoundaryDatum, points, tol: float = GRADIENT_TOL, fd_check: bool = False) -> ExtensionResult:
    """grad u = (d_x1, ..., d_t) u at each point; values have shape (P, n, M).

    With ``fd_check`` the result is compared with centered differences of
    :func:`extend` at step 1e-4 t and ``fd_flag`` marks points that disagree
    by more than 10 tol.  The differenced values keep the truncation ball
    |y - x| < t R fixed in y; a ball fixed in z would move with t and add
    a spurious d/dt term of the size of the value budget over t.
    """
    res = _convolve(K, f, points, tol, grad=True)
    if fd_check:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        fd = np.zeros_like(res.values)
        rho = res.radius * pts[:, -1]
        for j in range(K.n):
            h = 1e-4 * pts[:, -1]
            e = np.zeros_like(pts)
            e[:, j] = h
            up = _convolve(K, f, pts + e, tol, False, rho).values
            dn = _convolve(K, f, pts - e, tol, False, rho).values
            fd[:, j] = (up - dn) / (2 * h[:, None])
        res.fd_flag = np.max(np.abs(fd - res.values), axis=(1, 2)) > 10 * tol
    return res


# ---------------------------------------------------------------------------
# solution fields


class Field:
    """A function on the half-space exposing values and gradients at points (P, n)."""

    n: int
    label: str = "field"

    def value(self, points) -> np.ndarray:
        raise NotImplementedError

    def grad(self, points) -> np.ndarray:
        raise NotImplementedError


@dataclass
class ConvolutionField(Field):
    kernel: PoissonKernel
    datum: BoundaryDatum
    tol: float = EXTEND_TOL
    grad_tol: float = GRADIENT_TOL

    @property
    def n(self):
        return self.kernel.n

    @property
    def label(self):
        return f"P*{self.datum.label}"

    def value(self, points):
        return extend(self.kernel, self.datum, points, self.tol).values

    def grad(self, points):
        return gradient(self.kernel, self.datum, points, self.grad_tol).values


@dataclass
class AnalyticField(Field):
    n: int
    u: Callable[[np.ndarray], np.ndarray]
    du: Callable[[np.ndarray], np.ndarray]
    label: str = "analytic"

    def value(self, points):
        return np.asarray(self.u(np.atleast_2d(points)))[..., None]

    def grad(self, points):
        return np.asarray(self.du(np.atleast_2d(points)))[..., None]


def linear_field(n: int = 2) -> AnalyticField:
    """u(x, t) = x_1."""
    def du(p):
        g = np.zeros(p.shape)
        g[:, 0] = 1.0
        return g

    return AnalyticField(n, lambda p: p[:, 0].copy(), du, "x1")


def constant_field(n: int = 2, c: float = 1.0) -> AnalyticField:
    return AnalyticField(n, lambda p: np.full(len(p), c), lambda p: np.zeros(p.shape), f"const({c:g})")


def decaying_cos_field() -> AnalyticField:
    """u = exp(-t) cos x, the Laplace extension of cos in n = 2."""
    def du(p):
        e = np.exp(-p[:, 1])
        return np.stack([-e * np.sin(p[:, 0]), -e * np.cos(p[:, 0])], axis=1)

    return AnalyticField(2, lambda p: np.exp(-p[:, 1]) * np.cos(p[:, 0]), du, "exp(-t)cos x")


def _grad_sq(field: Field, points: np.ndarray) -> np.ndarray:
    g = field.grad(points)
    return np.sum(np.abs(g.reshape(len(points), -1)) ** 2, axis=1)


# ---------------------------------------------------------------------------
# square functionals


def log_rule(lo: float, hi: float, per_unit: int = LOG_PANEL_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule in log t on (lo, hi): panels of unit length; returns t and d(log t) weights."""
    a, b = np.log(lo), np.log(hi)
    m = max(1, int(np.ceil(b - a)))
    edges = np.linspace(a, b, m + 1)
    y, w = gauss_legendre(per_unit)
    u = (edges[:-1, None] + np.diff(edges)[:, None] * y).ravel()
    return np.exp(u), (np.diff(edges)[:, None] * w).ravel()


def vertical_square(field: Field, x, ell: float) -> np.ndarray:
    """(int_0^ell |grad u(x, t)|^2 t dt)^(1/2) for each row of x, truncated at 1e-6 ell."""
    x = np.atleast_2d(np.asarray(x, dtype=float)).reshape(-1, field.n - 1)
    t, w = log_rule(1e-6 * ell, ell)
    pts = np.concatenate(
        [np.repeat(x, len(t), axis=0), np.tile(t, len(x))[:, None]], axis=1
    )
    g2 = _grad_sq(field, pts).reshape(len(x), len(t))
    return np.sqrt(g2 @ (t**2 * w))


@dataclass(frozen=True)
class ConeSpec:
    kappa: float
    vertex: tuple[float, ...]

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("cone aperture must be positive")


def _nested_slice_rule(n: int, kappas) -> tuple[np.ndarray, np.ndarray]:
    """Unit-height slice nodes (N, n-1) on the widest aperture, one weight row per aperture.

    The slice is split at every aperture so each narrower slice is an exact
    union of panels.
    """
    ks = np.unique(np.asarray(kappas, dtype=float))
    y, w = gauss_legendre(SLICE_PANEL_NODES)
    edges = np.concatenate([[0.0], ks])
    offs, wts, reach = [], [], []
    for a, b in zip(edges[:-1], edges[1:]):
        r = a + (b - a) * y
        if n == 2:
            offs += [r, -r]
            wts += [(b - a) * w] * 2
            reach += [np.full(2 * len(r), b)]
        else:
            phi = 2 * np.pi * (np.arange(SLICE_ANGLES) + 0.5) / SLICE_ANGLES
            offs.append(np.stack([np.outer(r, np.cos(phi)), np.outer(r, np.sin(phi))], -1).reshape(-1, 2))
            wts.append(np.repeat((b - a) * w * r, SLICE_ANGLES) * (2 * np.pi / SLICE_ANGLES))
            reach.append(np.full(len(r) * SLICE_ANGLES, b))
    off = np.concatenate(offs).reshape(-1, n - 1)
    wt = np.concatenate(wts)
    reach = np.concatenate(reach)
    rows = np.array([np.where(reach <= k, wt, 0.0) for k in np.asarray(kappas, dtype=float)])
    return off, rows


def conical_squares(field: Field, vertices, kappas, ells) -> np.ndarray:
    """A(x; ell, kappa) for every aperture, every ell and every vertex: shape (K, L, P).

    The heights are integrated over dyadic panels in log s, each cutoff
    ell = ell_max 2^-m keeping the 20 panels below it (down to about
    1e-6 ell).  A single gradient sweep therefore serves all apertures and
    all dyadically related ells.
    """
    ells = np.atleast_1d(np.asarray(ells, dtype=float))
    top = float(ells.max())
    steps = np.log2(top / ells)
    if not np.allclose(steps, np.round(steps), atol=1e-12):
        return np.stack([conical_squares(field, vertices, kappas, [e])[:, 0] for e in ells], axis=1)
    steps = np.round(steps).astype(int)
    for k in np.atleast_1d(kappas):
        ConeSpec(float(k), ())
    x = np.atleast_2d(np.asarray(vertices, dtype=float)).reshape(-1, field.n - 1)
    J = int(steps.max()) + CONE_PANELS
    y, w = gauss_legendre(DYADIC_PANEL_NODES)
    u_hi = np.log(top) - LOG2 * np.arange(J)
    u = (u_hi[:, None] - LOG2 * (1 - y)).ravel()
    s = np.exp(u)
    ws = np.tile(LOG2 * w, J)
    off, rows = _nested_slice_rule(field.n, kappas)
    pts_y = x[:, None, None, :] + s[None, :, None, None] * off[None, None, :, :]
    ss = np.broadcast_to(s[None, :, None, None], pts_y.shape[:-1] + (1,))
    pts = np.concatenate([pts_y, ss], axis=-1).reshape(-1, field.n)
    g2 = _grad_sq(field, pts).reshape(len(x), len(s), len(off))
    # slice measure scales like s^(n-1); with ds/s^n and s^2 |grad u|^2 the height weight is s^2
    dens = np.einsum("psn,kn->kps", g2, rows) * (s**2 * ws)
    panels = dens.reshape(len(rows), len(x), J, DYADIC_PANEL_NODES).sum(-1)
    out = np.stack([panels[:, :, m : m + CONE_PANELS].sum(-1) for m in steps], axis=1)
    return np.sqrt(out)


def conical_square(field: Field, vertices, kappa: float, ell: float) -> np.ndarray:
    """(int_0^ell int_{|y-x|<kappa s} |grad u(y, s)|^2 s^(2-n) dy ds)^(1/2) for each vertex."""
    return conical_squares(field, vertices, (kappa,), (ell,))[0, 0]


# ---------------------------------------------------------------------------
# boundary behaviour


@dataclass
class TraceReport:
    t: np.ndarray
    errors: np.ndarray
    target: np.ndarray
    passed: bool


def trace_probe(K: PoissonKernel, f: BoundaryDatum, x, kappa: float, t_sequence, tol: float = 1e-3) -> TraceReport:
    """|u(x + kappa t e_1, t) - f(x)| along a decreasing sequence of heights."""
    t = np.asarray(t_sequence, dtype=float)
    if np.any(np.diff(t) >= 0):
        raise ValueError("t_sequence must decrease")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    pts = np.zeros((len(t), K.n))
    pts[:, :-1] = x
    pts[:, 0] += kappa * t
    pts[:, -1] = t
    u = extend(K, f, pts, min(EXTEND_TOL, tol * 1e-2)).values
    target = f(x[None])[0]
    err = np.linalg.norm(u - target, axis=-1)
    tail = err[-3:]
    passed = bool(err[-1] <= tol and np.all(np.diff(tail) <= tol * 1e-3))
    return TraceReport(t, err, target, passed)
