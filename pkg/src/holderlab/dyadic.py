"""Dyadic trees on a lattice, stopping-time cubes and a John-Nirenberg engine.

A root cube Q0 in R^d is split into 2^depth cells per axis; all measures
are cell counts, so statements about piecewise-constant data are exact.
A level-k cube is a block of 2^(depth-k) cells per axis.

The engine works with a pair family (G_Q, H_Q): functions on each dyadic
cube with G_Q <= H_Q and the chain condition
G_Q(x) <= G_Q'(x) + H_Q(y) for x in Q' and y in the parent of Q'.
It measures the threshold m_alpha and the level-set profile Xi(t) and
checks Xi(t) <= exp(-log(1/alpha) t / m_alpha) / alpha.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gamma

from .extension import Field, conical_squares
from .seminorms import luxemburg_from_samples

DEPTH_1D = 14
DEPTH_2D = 7
MAX_PROBE_DEPTH = 10


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True)
class Root:
    corner: tuple[float, ...]
    side: float
    depth: int

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def cells(self) -> int:
        return 2**self.depth


def default_root(dim: int = 1, corner=None, side: float = 1.0) -> Root:
    corner = tuple([0.0] * dim) if corner is None else tuple(float(c) for c in corner)
    return Root(corner, float(side), DEPTH_1D if dim == 1 else DEPTH_2D)


@dataclass(frozen=True)
class DyadicCube:
    """Half-open dyadic cube: level k and integer position per axis."""

    level: int
    index: tuple[int, ...]
    root: Root

    def __post_init__(self):
        if self.level < 0 or any(not 0 <= i < 2**self.level for i in self.index):
            raise ValueError(f"cube (level {self.level}, index {self.index}) is outside the root")

    @property
    def side(self) -> float:
        return self.root.side * 2.0**-self.level

    @property
    def corner(self) -> np.ndarray:
        return np.asarray(self.root.corner) + np.asarray(self.index) * self.side

    def interval(self) -> list[tuple[float, float]]:
        return [(float(a), float(a + self.side)) for a in self.corner]

    def children(self) -> list["DyadicCube"]:
        base = [2 * i for i in self.index]
        return [
            DyadicCube(self.level + 1, tuple(b + o for b, o in zip(base, off)), self.root)
            for off in itertools.product((0, 1), repeat=len(self.index))
        ]

    def parent(self) -> "DyadicCube":
        if self.level == 0:
            raise ValueError("the root has no parent")
        return DyadicCube(self.level - 1, tuple(i // 2 for i in self.index), self.root)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all((self.corner <= x) & (x < self.corner + self.side)))

    def cell_slices(self) -> tuple[slice, ...]:
        m = 2 ** (self.root.depth - self.level)
        return tuple(slice(i * m, (i + 1) * m) for i in self.index)

    def label(self) -> str:
        return " x ".join(f"[{a:.6g},{b:.6g})" for a, b in self.interval())


def cubes_at(root: Root, level: int) -> list[DyadicCube]:
    return [DyadicCube(level, idx, root) for idx in itertools.product(range(2**level), repeat=root.dim)]


def cell_centers(root: Root) -> np.ndarray:
    """Centers of the lattice cells, shape (2^depth,)*d + (d,)."""
    h = root.side / root.cells
    axes = [c + h * (np.arange(root.cells) + 0.5) for c in root.corner]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def lattice_samples(func: Callable[[np.ndarray], np.ndarray], root: Root, antiderivative=None, order: int = 4) -> np.ndarray:
    """Cell averages of a scalar function.

    In one dimension an antiderivative gives exact cell averages;
    otherwise a tensor Gauss rule of the given order is used in every cell.
    """
    h = root.side / root.cells
    if antiderivative is not None:
        if root.dim != 1:
            raise ValueError("antiderivative averages need a one-dimensional root")
        edges = root.corner[0] + h * np.arange(root.cells + 1)
        return np.diff(antiderivative(edges)) / h
    y, w = np.polynomial.legendre.leggauss(order)
    y, w = 0.5 * (y + 1), 0.5 * w
    centers = cell_centers(root)
    out = np.zeros(centers.shape[:-1])
    for off in itertools.product(range(order), repeat=root.dim):
        shift = np.array([(y[o] - 0.5) * h for o in off])
        out += np.prod([w[o] for o in off]) * func((centers + shift).reshape(-1, root.dim)).reshape(out.shape)
    return out


# ---------------------------------------------------------------------------
# block means


def block_view(a: np.ndarray, level: int) -> np.ndarray:
    """Reshape a lattice array (2^D,)*d into (cubes at level, cells per cube)."""
    d = a.ndim
    D = int(np.log2(a.shape[0]))
    n, m = 2**level, 2 ** (D - level)
    v = a.reshape(sum(((n, m) for _ in range(d)), ()))
    v = v.transpose(tuple(range(0, 2 * d, 2)) + tuple(range(1, 2 * d, 2)))
    return v.reshape(n**d, m**d)


def _unblock(b: np.ndarray, level: int, d: int, D: int) -> np.ndarray:
    n, m = 2**level, 2 ** (D - level)
    v = b.reshape((n,) * d + (m,) * d)
    order = []
    for j in range(d):
        order += [j, d + j]
    return v.transpose(order).reshape((2**D,) * d)


def _expand(means: np.ndarray, level: int, d: int, D: int) -> np.ndarray:
    """Broadcast per-cube values at ``level`` back to the lattice."""
    m = 2 ** (D - level)
    return _unblock(np.repeat(means[:, None], m**d, axis=1), level, d, D)


def dyadic_maximal_lattice(f: np.ndarray, top: int = 0) -> np.ndarray:
    """M^d f on every cell, with ancestors from level ``top`` down to single cells."""
    g = np.abs(np.asarray(f, dtype=float))
    d = g.ndim
    D = int(np.log2(g.shape[0]))
    out = g.copy()
    for k in range(top, D):
        out = np.maximum(out, _expand(block_view(g, k).mean(axis=1), k, d, D))
    return out


def dyadic_maximal(f: np.ndarray, root: Root, x) -> float:
    """Localized dyadic maximal function of lattice data at a point of Q0."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = root.side / root.cells
    idx = np.floor((x - np.asarray(root.corner)) / h).astype(int)
    if np.any(idx < 0) or np.any(idx >= root.cells):
        raise ValueError(f"point {x.tolist()} lies outside the root cube")
    g = np.abs(np.asarray(f, dtype=float))
    best = 0.0
    for k in range(root.depth + 1):
        m = 2 ** (root.depth - k)
        sl = tuple(slice((i // m) * m, (i // m + 1) * m) for i in idx)
        best = max(best, float(g[sl].mean()))
    return best


# ---------------------------------------------------------------------------
# stopping-time cubes


@dataclass
class StoppingResult:
    cubes: list[DyadicCube]
    densities: list[float]
    union_matches: bool
    bounds_hold: bool

    def to_json(self) -> list[dict]:
        return [{"interval": q.interval(), "density": r} for q, r in zip(self.cubes, self.densities)]


def stopping_decomposition(mask: np.ndarray, root: Root, beta: float) -> StoppingResult:
    """Maximal dyadic cubes Q_j with |F cap Q_j| > beta |Q_j| for a lattice set F.

    Each output satisfies beta < density <= 2^d beta, and their union is
    {M^d 1_F > beta} (both checked on the lattice).
    """
    F = np.asarray(mask, dtype=bool)
    if F.shape != (root.cells,) * root.dim:
        raise ValueError(f"mask shape {F.shape} does not match the lattice")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if F.mean() >= beta:
        raise ValueError(f"density of F in the root is {F.mean():.6g}, needs to be below beta={beta}")
    d, D = root.dim, root.depth
    covered = np.zeros((1,) * d, dtype=bool)
    cubes, dens = [], []
    for k in range(D + 1):
        rho = block_view(F.astype(float), k).mean(axis=1)
        up = np.repeat(covered.reshape(-1), 1) if k == 0 else _coarse_to(covered, k)
        new = (rho > beta) & ~up
        for flat in np.flatnonzero(new):
            idx = np.unravel_index(flat, (2**k,) * d)
            cubes.append(DyadicCube(k, tuple(int(i) for i in idx), root))
            dens.append(float(rho[flat]))
        covered = (up | new).reshape((2**k,) * d)
    union = np.zeros(F.shape, dtype=bool)
    for q in cubes:
        union[q.cell_slices()] = True
    maximal = dyadic_maximal_lattice(F.astype(float))
    union_ok = bool(np.array_equal(union, maximal > beta))
    bounds_ok = all(beta < r <= 2**d * beta for r in dens)
    return StoppingResult(cubes, dens, union_ok, bounds_ok)


def _coarse_to(covered: np.ndarray, k: int) -> np.ndarray:
    """Refine a covered flag array at level k-1 to level k (flattened)."""
    c = covered
    for ax in range(c.ndim):
        c = np.repeat(c, 2, axis=ax)
    return c.reshape(-1)


# ---------------------------------------------------------------------------
# pair families


@dataclass
class PairFamily:
    """(G_Q, H_Q) evaluated on the cells of each probed cube.

    ``values(level)`` returns two arrays of shape (cubes at level,
    cells per cube) in the order of :func:`cubes_at`; ``depth`` is the
    deepest probed level and ``cell_depth`` the lattice resolution.
    """

    values: Callable[[int], tuple[np.ndarray, np.ndarray]]
    root: Root
    depth: int
    label: str
    extra: dict = field(default_factory=dict)
    _memo: dict = field(default_factory=dict, repr=False)

    def at(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        if level not in self._memo:
            self._memo[level] = self.values(level)
        return self._memo[level]


def bmo_family(samples: np.ndarray, root: Root, depth: int = MAX_PROBE_DEPTH) -> PairFamily:
    """G_Q = |f - f_Q| and H_Q = 2^d M^d_Q |f - f_Q| on lattice data.

    ``extra`` carries the measured BMO seminorm (max over probed cubes of
    mean |f - f_Q|) and the explicit bound 2^d e ||f||_BMO for m_{1/e}.
    """
    f = np.asarray(samples, dtype=float)
    d, D = root.dim, root.depth
    depth = min(depth, D)

    def values(k):
        rows = block_view(f, k)
        G = np.abs(rows - rows.mean(axis=1, keepdims=True))
        return G, 2**d * _local_maximal(G, d, D - k)

    bmo = 0.0
    for k in range(depth + 1):
        rows = block_view(f, k)
        bmo = max(bmo, float(np.max(np.mean(np.abs(rows - rows.mean(axis=1, keepdims=True)), axis=1))))
    return PairFamily(values, root, depth, "bmo", {"bmo": bmo, "m_bound": 2**d * np.e * bmo})


def _local_maximal(rows: np.ndarray, d: int, sub: int) -> np.ndarray:
    """M^d_Q for each row, a cube flattened as by :func:`block_view` with 2^sub cells per axis."""
    R = rows.shape[0]
    g = rows.reshape((R,) + (2**sub,) * d)
    out = g.copy()
    for j in range(sub):
        n, m = 2**j, 2 ** (sub - j)
        v = g.reshape((R,) + sum(((n, m) for _ in range(d)), ()))
        means = v.mean(axis=tuple(range(2, 2 * d + 1, 2)), keepdims=True)
        out = np.maximum(out, np.broadcast_to(means, v.shape).reshape(g.shape))
    return out.reshape(R, -1)


def conical_family(
    field: Field, phi: Callable, root: Root, depth: int = 3, cells_per_axis: int = 16, kappa: float | None = None
) -> PairFamily:
    """G_Q = A(x; side, 1) / phi(side) and H_Q = A(x; side, kappa) / phi(side).

    A is the conical square function; the default aperture is
    kappa = 1 + 2 sqrt(d).  Values are taken at the centers of a coarse
    lattice with ``cells_per_axis`` cells per axis of Q0, which caps the
    number of cone integrals.
    """
    d = root.dim
    kappa = 1 + 2 * np.sqrt(d) if kappa is None else kappa
    D = int(np.log2(cells_per_axis))
    if 2**D != cells_per_axis:
        raise ValueError("cells_per_axis must be a power of two")
    coarse = Root(root.corner, root.side, D)
    centers = cell_centers(coarse).reshape(-1, d)
    depth = min(depth, D)

    sides = root.side * 2.0 ** -np.arange(depth + 1)
    table = {}

    def values(k):
        if not table:
            # one gradient sweep serves both apertures at every level
            table["A"] = conical_squares(field, centers, (1.0, kappa), sides)
        scale = float(phi(sides[k]))
        a1, ak = table["A"][0, k] / scale, table["A"][1, k] / scale
        return block_view(a1.reshape((2**D,) * d), k), block_view(ak.reshape((2**D,) * d), k)

    return PairFamily(values, coarse, depth, f"conical(kappa={kappa:g})", {"kappa": kappa})


# ---------------------------------------------------------------------------
# invariants of a family


def family_invariants(family: PairFamily, samples: int = 200, seed: int = 0, slack: float = 1e-9) -> dict:
    """Spot-check G <= H everywhere and the chain condition on sampled (Q, Q')."""
    worst_gh = 0.0
    for k in range(family.depth + 1):
        G, H = family.at(k)
        worst_gh = max(worst_gh, float(np.max(G - H)))
    rng = np.random.default_rng(seed)
    d = family.root.dim
    D = family.root.depth
    worst_chain = -np.inf
    for _ in range(samples):
        k = int(rng.integers(0, family.depth))
        j = int(rng.integers(k + 1, family.depth + 1))
        q = int(rng.integers(0, 2 ** (k * d)))
        G, H = family.at(k)
        Gs, _ = family.at(j)
        gq = G[q].reshape((2 ** (D - k),) * d)
        hq = H[q].reshape((2 ** (D - k),) * d)
        # a level-j descendant Q' of Q and its parent, as cell blocks inside Q
        rel = rng.integers(0, 2 ** (j - k), d)
        m = 2 ** (D - j)
        inner = tuple(slice(r * m, (r + 1) * m) for r in rel)
        par = tuple(slice((r // 2) * 2 * m, (r // 2 + 1) * 2 * m) for r in rel)
        qidx = np.unravel_index(q, (2**k,) * d)
        gidx = tuple(int(qi) * 2 ** (j - k) + int(r) for qi, r in zip(qidx, rel))
        gsub = Gs[np.ravel_multi_index(gidx, (2**j,) * d)].reshape((m,) * d)
        gap = float(np.max(gq[inner] - gsub) - np.min(hq[par]))
        worst_chain = max(worst_chain, gap)
    return {
        "g_le_h": worst_gh <= slack,
        "g_minus_h_max": worst_gh,
        "chain": worst_chain <= slack,
        "chain_gap_max": worst_chain,
    }


# ---------------------------------------------------------------------------
# John-Nirenberg profile


@dataclass
class JNProfile:
    alpha: float
    m_alpha: float
    t: np.ndarray
    xi: np.ndarray
    bound: np.ndarray
    holds: bool
    witness: dict

    def rows(self) -> list[dict]:
        return [
            {"t": float(a), "xi": float(b), "bound": float(c), "ok": bool(b <= c + 1e-15)}
            for a, b, c in zip(self.t, self.xi, self.bound)
        ]


def threshold(values: np.ndarray, alpha: float) -> np.ndarray:
    """inf{lambda : #{v > lambda} <= alpha N} per row: the (floor(alpha N) + 1)-th largest value."""
    v = np.sort(np.asarray(values, dtype=float), axis=-1)[..., ::-1]
    k = int(np.floor(alpha * v.shape[-1]))
    if k >= v.shape[-1]:
        return np.zeros(v.shape[:-1])
    return v[..., k]


def jn_profile(family: PairFamily, alpha: float, t_grid=None, n_t: int = 20) -> JNProfile:
    """m_alpha, Xi(t) and the exponential bound check over the probed cubes.

    Without ``t_grid`` the grid is {1, ..., n_t} m_alpha / 2.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    m_alpha, where = 0.0, (0, 0)
    for k in range(family.depth + 1):
        _, H = family.at(k)
        m = threshold(H, alpha)
        i = int(np.argmax(m))
        if m[i] > m_alpha:
            m_alpha, where = float(m[i]), (k, i)
    if t_grid is None:
        t_grid = np.arange(1, n_t + 1) * (m_alpha / 2 if m_alpha > 0 else 1.0)
    t = np.asarray(t_grid, dtype=float)
    xi = np.zeros_like(t)
    for k in range(family.depth + 1):
        G, _ = family.at(k)
        frac = np.mean(G[:, :, None] > t[None, None, :], axis=1)
        xi = np.maximum(xi, frac.max(axis=0))
    rate = np.log(1 / alpha)
    with np.errstate(divide="ignore", over="ignore"):
        bound = np.where(m_alpha > 0, np.exp(-rate * t / m_alpha) / alpha, 0.0) if m_alpha > 0 else np.zeros_like(t)
    holds = bool(np.all(xi <= bound + 1e-15))
    return JNProfile(alpha, m_alpha, t, xi, bound, holds, {"level": where[0], "cube": where[1]})


@dataclass
class OrliczReport:
    q: float
    lq_lhs: float
    lq_rhs: float
    exp_lhs: float
    exp_rhs: float

    @property
    def lq_ok(self) -> bool:
        return self.lq_lhs <= self.lq_rhs * (1 + 1e-12)

    @property
    def exp_ok(self) -> bool:
        return self.exp_lhs <= self.exp_rhs * (1 + 1e-12)


def lq_constant(q: float) -> float:
    """Gamma(q + 1)^(1/q): the L^q norm of an exponential profile."""
    return float(gamma(q + 1) ** (1 / q))


def orlicz_conclusions(family: PairFamily, profile: JNProfile, q: float = 2.0) -> OrliczReport:
    """Largest (mean G_Q^q)^(1/q) and Luxemburg norm of G_Q over probed cubes versus their bounds.

    The bounds integrate the exponential profile:
    C_q alpha^(-1/q) m / log(1/alpha) and (1 + 1/alpha) m / log(1/alpha).
    """
    a, m = profile.alpha, profile.m_alpha
    lq, lux = 0.0, 0.0
    for k in range(family.depth + 1):
        G, _ = family.at(k)
        lq = max(lq, float(np.max(np.mean(G**q, axis=1) ** (1 / q))))
        w = np.full(G.shape[1], 1.0 / G.shape[1])
        lux = max(lux, max(luxemburg_from_samples(g, w) for g in G))
    rate = np.log(1 / a)
    return OrliczReport(q, lq, lq_constant(q) * a ** (-1 / q) * m / rate, lux, (1 + 1 / a) * m / rate)
