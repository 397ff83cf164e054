"""Estimators for oscillation, Hoelder, Morrey-Campanato and square-function seminorms.

Every sup is taken over a finite, seeded family of cubes or pairs, so the
estimates are lower bounds of the true suprema.  ``doubling_report``
measures how much an estimate moves when the family doubles.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import growthfn as gf
from .extension import BoundaryDatum, Field, vertical_square
from .quadrature import gauss_legendre, split_blocks

CUBE_NODES = 32
EXP_CAP = 709.0  # largest argument of exp that stays finite
LUX_RTOL = 1e-12


# ---------------------------------------------------------------------------
# cube families


@dataclass(frozen=True)
class Cube:
    """Half-open cube [corner, corner + side)^d."""

    corner: tuple[float, ...]
    side: float

    @property
    def center(self) -> np.ndarray:
        return np.asarray(self.corner) + self.side / 2

    def to_row(self) -> dict:
        return {"corner": ";".join(f"{c:.17g}" for c in self.corner), "side": self.side}


@dataclass(frozen=True)
class CubeSweep:
    """Cubes of side 2^-k times the root side for k in levels, inside a root cube.

    Each level holds the lattice cubes (strided down to ``offsets_per_level``
    if there are more) and ``offsets_per_level`` seeded random cubes.  The
    random stream of a level depends only on (seed, level), so
    :meth:`doubled` is a superset of the original sweep.
    """

    root_corner: tuple[float, ...]
    root_side: float
    levels: tuple[int, int]
    offsets_per_level: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.root_side <= 0:
            raise ValueError("root side must be positive")
        if self.levels[0] > self.levels[1]:
            raise ValueError("levels must be (k_min, k_max) with k_min <= k_max")

    @property
    def dim(self) -> int:
        return len(self.root_corner)

    def doubled(self) -> "CubeSweep":
        return CubeSweep(self.root_corner, self.root_side, self.levels, 2 * self.offsets_per_level, self.seed)

    def _lattice(self, k: int) -> np.ndarray:
        per_axis = 2**k
        total = per_axis**self.dim
        stride = 1
        while total // stride**self.dim > self.offsets_per_level and stride < per_axis:
            stride *= 2
        idx = np.arange(0, per_axis, stride)
        grids = np.meshgrid(*([idx] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1) * (self.root_side / per_axis)

    def cubes(self) -> list[Cube]:
        out: dict[Cube, None] = {}
        root = np.asarray(self.root_corner, dtype=float)
        for k in range(self.levels[0], self.levels[1] + 1):
            side = self.root_side * 2.0**-k
            if k >= 0:
                for off in self._lattice(k):
                    out[Cube(tuple(root + off), side)] = None
            rng = np.random.default_rng([self.seed, k + 1000])
            free = max(self.root_side - side, 0.0)
            for off in rng.uniform(0.0, 1.0, (self.offsets_per_level, self.dim)) * free:
                out[Cube(tuple(root + off), side)] = None
        return list(out)

    @property
    def count(self) -> int:
        return len(self.cubes())


def cube_rule(cube: Cube, cuts=(), order: int = CUBE_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss nodes (N, d) and averaging weights (N,) on a cube, split at cuts along x_1."""
    a = np.asarray(cube.corner, dtype=float)
    x1, w1 = split_blocks(a[0], a[0] + cube.side, list(cuts), order)
    axes = [(x1, w1)]
    y, w = gauss_legendre(order)
    for j in range(1, len(a)):
        axes.append((a[j] + cube.side * y, cube.side * w))
    grids = np.meshgrid(*[ax[0] for ax in axes], indexing="ij")
    wgrid = np.meshgrid(*[ax[1] for ax in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    return nodes, weights / weights.sum()


# ---------------------------------------------------------------------------
# estimates


@dataclass
class Estimate:
    """A lower-bound estimate of a supremum with the witness that attains it."""

    value: float
    witness: object
    probes: int
    detail: dict = field(default_factory=dict)


def doubling_report(estimator: Callable[[CubeSweep], Estimate], sweep: CubeSweep) -> dict:
    """Estimate on a sweep and on its doubled superset, with the relative change."""
    base = estimator(sweep)
    more = estimator(sweep.doubled())
    scale = max(abs(base.value), abs(more.value))
    change = 0.0 if scale == 0 else abs(more.value - base.value) / scale
    return {"base": base.value, "doubled": more.value, "relative_change": change}


def _level_crossings(f: BoundaryDatum, cube: Cube, level: float, cuts) -> list[float]:
    """Points along x_1 (other coordinates at the cube center) where a real scalar f crosses ``level``."""
    c = cube.center
    a = cube.corner[0]
    grid = np.unique(np.concatenate([np.linspace(a, a + cube.side, 257), [b for b in cuts if a < b < a + cube.side]]))

    def g(s):
        pts = np.tile(c, (np.size(s), 1))
        pts[:, 0] = s
        return f(pts)[:, 0].real - level

    vals = g(grid)
    roots = list(grid[1:-1][vals[1:-1] == 0])
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        roots.append(brentq(lambda s: float(g(np.array([s]))[0]), grid[i], grid[i + 1], xtol=1e-15 * cube.side))
    return roots


def _mean_oscillation(f: BoundaryDatum, cube: Cube, p: float) -> float:
    x, w = cube_rule(cube, f.breakpoints)
    v = f(x)
    mean = w @ v
    if f.M == 1 and np.isrealobj(v):
        # |f - f_Q| has a kink where f crosses its mean; split the panels there
        cuts = tuple(f.breakpoints) + tuple(_level_crossings(f, cube, float(mean[0]), f.breakpoints))
        x, w = cube_rule(cube, cuts)
        v = f(x)
    dev = np.linalg.norm(v - mean, axis=-1)
    return float((w @ dev**p) ** (1.0 / p))


def _check_p(p: float):
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")


def osc_p(f: BoundaryDatum, p: float, r: float, sweep: CubeSweep) -> Estimate:
    """max over swept cubes of side <= r of (mean_Q |f - f_Q|^p)^(1/p)."""
    _check_p(p)
    if r <= 0:
        raise ValueError("scale r must be positive")
    best, arg, probes = 0.0, None, 0
    for q in sweep.cubes():
        if q.side > r:
            continue
        probes += 1
        v = _mean_oscillation(f, q, p)
        if v > best or arg is None:
            best, arg = v, q
    return Estimate(best, arg, probes)


def morrey_campanato_seminorm(f: BoundaryDatum, omega: gf.GrowthFunction, p: float, sweep: CubeSweep) -> Estimate:
    """max over swept cubes of (mean_Q |f - f_Q|^p)^(1/p) / omega(side)."""
    _check_p(p)
    best, arg = 0.0, None
    cubes = sweep.cubes()
    per_cube = []
    for q in cubes:
        v = _mean_oscillation(f, q, p) / float(omega(q.side))
        per_cube.append(v)
        if v > best or arg is None:
            best, arg = v, q
    return Estimate(best, arg, len(cubes), {"per_cube": per_cube})


# ---------------------------------------------------------------------------
# Hoelder seminorm


def structured_pairs(dim: int, sep_exps=(-20, 20), anchor_exps=(-20, 20), halfspace: bool = False, t_exps=(-6, 1)):
    """Lattice pairs: anchors 0 and +-2^m e_1, steps +-2^j e_i for every axis.

    In the half-space the anchors also carry heights 2^m, m in t_exps, and
    only pairs whose heights both stay in [2^t_lo, 2^t_hi] are kept.
    """
    steps = 2.0 ** np.arange(sep_exps[0], sep_exps[1] + 1)
    anchors = np.concatenate([[0.0], 2.0 ** np.arange(anchor_exps[0], anchor_exps[1] + 1)])
    anchors = np.concatenate([anchors, -anchors[1:]])
    width = dim + 1 if halfspace else dim
    base = np.zeros((len(anchors), width))
    base[:, 0] = anchors
    if halfspace:
        heights = 2.0 ** np.arange(t_exps[0], t_exps[1] + 1)
        base = np.concatenate([np.c_[base[:, :-1], np.full(len(base), h)] for h in heights])
    xs, ys = [], []
    for axis in range(width):
        for sgn in (1.0, -1.0):
            e = np.zeros(width)
            e[axis] = sgn
            x = np.repeat(base, len(steps), axis=0)
            y = x + np.tile(steps, len(base))[:, None] * e
            if halfspace:
                keep = (y[:, -1] >= 2.0 ** t_exps[0]) & (y[:, -1] <= 2.0 ** t_exps[1])
                x, y = x[keep], y[keep]
            xs.append(x)
            ys.append(y)
    return np.concatenate(xs), np.concatenate(ys)


@dataclass
class PairSample:
    """Point pairs with the function values at both ends, reusable for several moduli."""

    x: np.ndarray
    y: np.ndarray
    fx: np.ndarray
    fy: np.ndarray

    def estimate(self, omega: gf.GrowthFunction) -> Estimate:
        d = np.linalg.norm(self.x - self.y, axis=1)
        num = np.linalg.norm((self.fx - self.fy).reshape(len(d), -1), axis=1)
        ratio = num / omega(d)
        i = int(np.argmax(ratio))
        return Estimate(float(ratio[i]), (self.x[i].copy(), self.y[i].copy()), len(ratio))


def sample_pairs(
    func: Callable[[np.ndarray], np.ndarray],
    dim: int,
    pair_budget: int = 10_000,
    seed: int = 0,
    halfspace: bool = False,
    sep_exps=(-20, 20),
    anchor_exps=(-20, 20),
    t_exps=(-6, 1),
) -> PairSample:
    """Structured pairs plus ``pair_budget`` seeded random pairs, evaluated once.

    Random pairs have log-uniform positions and separations over the same
    exponent ranges; in the half-space their heights are log-uniform in
    [2^t_lo, 2^t_hi].
    """
    x, y = structured_pairs(dim, sep_exps, anchor_exps, halfspace, t_exps)
    width = x.shape[1]
    if pair_budget > 0:
        rng = np.random.default_rng(seed)
        rx = rng.choice([-1.0, 1.0], (pair_budget, width)) * 2.0 ** rng.uniform(*anchor_exps, (pair_budget, width))
        step = rng.normal(size=(pair_budget, width))
        step *= (2.0 ** rng.uniform(*sep_exps, pair_budget) / np.linalg.norm(step, axis=1))[:, None]
        ry = rx + step
        if halfspace:
            rx[:, -1] = 2.0 ** rng.uniform(*t_exps, pair_budget)
            ry[:, -1] = 2.0 ** rng.uniform(*t_exps, pair_budget)
        x, y = np.concatenate([x, rx]), np.concatenate([y, ry])
    vals = np.asarray(func(np.concatenate([x, y])))
    vals = vals.reshape(2 * len(x), -1)
    return PairSample(x, y, vals[: len(x)], vals[len(x) :])


def holder_seminorm(
    func: Callable[[np.ndarray], np.ndarray],
    omega: gf.GrowthFunction,
    dim: int,
    pair_budget: int = 10_000,
    seed: int = 0,
    halfspace: bool = False,
    sep_exps=(-20, 20),
    anchor_exps=(-20, 20),
    t_exps=(-6, 1),
) -> Estimate:
    """sup |F(x) - F(y)| / omega(|x - y|) over structured and seeded random pairs.

    ``func`` maps points (P, dim) (or (P, dim + 1) with ``halfspace``) to
    values (P, M).
    """
    return sample_pairs(func, dim, pair_budget, seed, halfspace, sep_exps, anchor_exps, t_exps).estimate(omega)


# ---------------------------------------------------------------------------
# Luxemburg norm


def luxemburg_from_samples(values, weights) -> float:
    """inf{tau : sum w (exp(|g|/tau) - 1) <= 1} for node values and averaging weights."""
    g = np.abs(np.asarray(values, dtype=float)).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if not np.all(np.isfinite(g)):
        return np.inf
    top = float(g.max()) if g.size else 0.0
    if top == 0.0:
        return 0.0

    def phi(tau):
        z = g / tau
        if z.max() > EXP_CAP:
            return np.inf
        return float(w @ np.expm1(z)) - 1.0

    tau = max(float(w @ g) / np.log(2.0), top / EXP_CAP)
    lo = hi = tau
    while phi(hi) > 0:
        hi *= 2
    while phi(lo) <= 0:
        lo /= 2
    return float(brentq(lambda s: phi(s) if np.isfinite(phi(s)) else 1e300, lo, hi, rtol=LUX_RTOL, xtol=1e-300))


def luxemburg_norm(g: Callable[[np.ndarray], np.ndarray], cube: Cube, cuts=(), order: int = CUBE_NODES) -> float:
    """exp L Luxemburg norm of a scalar callback over a cube (Gauss nodes)."""
    x, w = cube_rule(cube, cuts, order)
    return luxemburg_from_samples(g(x), w)


# ---------------------------------------------------------------------------
# square-function seminorms


class SquareTable:
    """V(x'; side(Q)) at the Gauss nodes of each cube, computed once per cube."""

    def __init__(self, field: Field, order: int = CUBE_NODES):
        self.field = field
        self.order = order
        self._store: dict[Cube, tuple[np.ndarray, np.ndarray]] = {}

    def prefetch(self, cubes) -> None:
        """Evaluate all missing cubes, batching cubes of equal side into one call."""
        todo: dict[float, list[Cube]] = {}
        for c in cubes:
            if c not in self._store:
                todo.setdefault(c.side, []).append(c)
        for side, group in todo.items():
            rules = [cube_rule(c, (), self.order) for c in group]
            v = vertical_square(self.field, np.concatenate([r[0] for r in rules]), side)
            v = v.reshape(len(group), -1)
            for c, r, row in zip(group, rules, v):
                self._store[c] = (row, r[1])

    def __call__(self, cube: Cube) -> tuple[np.ndarray, np.ndarray]:
        if cube not in self._store:
            self.prefetch([cube])
        return self._store[cube]


def _table(u) -> SquareTable:
    return u if isinstance(u, SquareTable) else SquareTable(u)


def star2_q(u, omega: gf.GrowthFunction, q: float, sweep: CubeSweep) -> Estimate:
    """max over cubes of omega(side)^-1 (mean_Q V^q)^(1/q); ``u`` is a Field or a SquareTable."""
    if not q > 0:
        raise ValueError("q must be positive")
    table = _table(u)
    table.prefetch(sweep.cubes())
    best, arg = 0.0, None
    for cube in sweep.cubes():
        v, w = table(cube)
        val = float((w @ v**q) ** (1.0 / q)) / float(omega(cube.side))
        if val > best or arg is None:
            best, arg = val, cube
    return Estimate(best, arg, sweep.count)


def star2_exp(u, omega: gf.GrowthFunction, sweep: CubeSweep) -> Estimate:
    """max over cubes of omega(side)^-1 times the Luxemburg norm of V on the cube."""
    table = _table(u)
    table.prefetch(sweep.cubes())
    best, arg = 0.0, None
    for cube in sweep.cubes():
        v, w = table(cube)
        val = luxemburg_from_samples(v, w) / float(omega(cube.side))
        if val > best or arg is None:
            best, arg = val, cube
    return Estimate(best, arg, sweep.count)


def log_lattice(x_points, t_exps=(-12, 4), per_octave: int = 4) -> np.ndarray:
    """Points (x', t) with t = 2^(j / per_octave) over the exponent range, for each x'."""
    x = np.atleast_2d(np.asarray(x_points, dtype=float))
    t = 2.0 ** (np.arange(t_exps[0] * per_octave, t_exps[1] * per_octave + 1) / per_octave)
    return np.concatenate([np.repeat(x, len(t), axis=0), np.tile(t, len(x))[:, None]], axis=1)


def star2_inf(u: Field, omega: gf.GrowthFunction, points) -> Estimate:
    """max of t |grad u(x', t)| / omega(t) over the given half-space points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    g = u.grad(pts).reshape(len(pts), -1)
    t = pts[:, -1]
    ratio = t * np.linalg.norm(g, axis=1) / omega(t)
    i = int(np.argmax(ratio))
    return Estimate(float(ratio[i]), pts[i].copy(), len(pts))
