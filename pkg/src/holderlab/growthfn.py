"""Growth functions: catalog, integral transforms and condition checks.

A growth function is a positive non-decreasing modulus on (0, inf) that
vanishes at the origin.  Every integral below is taken in u = log s on
dyadic blocks, split at the modulus' breakpoints, with a geometric tail
extrapolation past the last block.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .quadrature import LOG2, geometric_tail, split_blocks

GRID_POINTS = 4096
SCAN_EXPONENTS = (-20.0, 20.0)
DIVERGENCE_DOUBLINGS = 60
QUAD_BLOCKS = 240
CAUCHY_RTOL = 1e-6


class DivergenceError(ValueError):
    """An improper integral of the modulus does not converge."""


@dataclass(frozen=True)
class GrowthFunction:
    func: Callable[[np.ndarray], np.ndarray]
    label: str
    params: dict = field(default_factory=dict)
    breakpoints: tuple[float, ...] = ()

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    def scaled(self, c: float) -> "GrowthFunction":
        f = self.func
        return GrowthFunction(lambda t: c * f(t), f"{c:g}*{self.label}", dict(self.params), self.breakpoints)


def _logplus(t):
    with np.errstate(divide="ignore"):
        return np.maximum(0.0, np.log(t))


def _in_unit(name, **vals):
    for k, v in vals.items():
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name}: parameter {k}={v} must lie in (0, 1)")


def catalog(name: str, **params) -> GrowthFunction:
    """Build one of the named moduli.

    power(alpha), power-logplus(alpha, theta), power-loginv(alpha, theta),
    min-powers(alpha, beta), max-powers(alpha, beta), example6(alpha, beta).
    """
    if name == "power":
        a = float(params["alpha"])
        _in_unit(name, alpha=a)
        return GrowthFunction(lambda t: t**a, f"power(a={a:g})", {"alpha": a})
    if name == "power-logplus":
        a, th = float(params["alpha"]), float(params["theta"])
        _in_unit(name, alpha=a)
        A = max(1.0, -th / a)
        return GrowthFunction(
            lambda t: t**a * (A + _logplus(t)) ** th,
            f"power-logplus(a={a:g},theta={th:g})",
            {"alpha": a, "theta": th, "A": A},
            (1.0,),
        )
    if name == "power-loginv":
        a, th = float(params["alpha"]), float(params["theta"])
        _in_unit(name, alpha=a)
        A = max(1.0, th / a)
        return GrowthFunction(
            lambda t: t**a * (A + _logplus(1.0 / t)) ** th,
            f"power-loginv(a={a:g},theta={th:g})",
            {"alpha": a, "theta": th, "A": A},
            (1.0,),
        )
    if name in ("min-powers", "max-powers"):
        a, b = float(params["alpha"]), float(params["beta"])
        _in_unit(name, alpha=a, beta=b)
        op = np.minimum if name == "min-powers" else np.maximum
        return GrowthFunction(
            lambda t: op(t**a, t**b), f"{name}(a={a:g},b={b:g})", {"alpha": a, "beta": b}, (1.0,)
        )
    if name == "example6":
        a, b = float(params["alpha"]), float(params["beta"])
        _in_unit(name, alpha=a, beta=b)

        def ex6(t):
            big = t > 1.0
            out = np.empty_like(t)
            out[~big] = t[~big] ** a
            out[big] = 1.0 + np.log(t[big]) ** b
            return out

        return GrowthFunction(
            lambda t: ex6(np.atleast_1d(t)).reshape(np.shape(t)),
            f"example6(a={a:g},b={b:g})",
            {"alpha": a, "beta": b},
            (1.0,),
        )
    raise ValueError(f"unknown growth function {name!r}")


CATALOG_NAMES = ("power", "power-logplus", "power-loginv", "min-powers", "max-powers", "example6")


def linear() -> GrowthFunction:
    """omega(t) = t; a growth function that fails the tail condition."""
    return GrowthFunction(lambda t: t * 1.0, "linear")


def constant_one() -> GrowthFunction:
    """omega = 1, the BMO normalisation (not a growth function: no decay at 0)."""
    return GrowthFunction(lambda t: np.ones_like(t), "one")


# ---------------------------------------------------------------------------
# integral transforms


def _blocks(omega: GrowthFunction, t: np.ndarray, up: bool, n_blocks: int, order: int = 32):
    """Per-block integrals of the W- or tail-integrand for each t."""
    t = np.asarray(t, dtype=float)
    lt = np.log(t)[..., None]
    k = np.arange(n_blocks, dtype=float)
    if up:
        lo, hi = lt + k * LOG2, lt + (k + 1) * LOG2
    else:
        lo, hi = lt - (k + 1) * LOG2, lt - k * LOG2
    cuts = [np.log(b) for b in omega.breakpoints]
    u, w = split_blocks(lo, hi, cuts, order)
    s = np.exp(u)
    vals = omega(s)
    if up:
        # t * omega(s) / s^2 ds  ==  omega(s) * exp(log t - u) du
        vals = vals * np.exp(lt[..., None] - u)
    return np.sum(vals * w, axis=-1)


def _summed(omega: GrowthFunction, t, up: bool, chunk: int = 512):
    """Extrapolated block sums; only unsettled points get the long block run."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    flat_t = t.reshape(-1)
    vals = np.empty(flat_t.shape)
    ok = np.empty(flat_t.shape, dtype=bool)
    for i in range(0, flat_t.size, chunk):
        part = flat_t[i : i + chunk]
        c = _blocks(omega, part, up=up, n_blocks=DIVERGENCE_DOUBLINGS)
        v, good = geometric_tail(c, CAUCHY_RTOL, DIVERGENCE_DOUBLINGS)
        v_prev, _ = geometric_tail(c[:, :-1], CAUCHY_RTOL, DIVERGENCE_DOUBLINGS)
        with np.errstate(invalid="ignore"):
            settled = good & (np.abs(v - v_prev) <= 1e-15 * np.abs(v))
        redo = np.flatnonzero(~settled & good)
        if redo.size:
            c_long = _blocks(omega, part[redo], up=up, n_blocks=QUAD_BLOCKS)
            v[redo], good[redo] = geometric_tail(c_long, CAUCHY_RTOL, DIVERGENCE_DOUBLINGS)
        vals[i : i + chunk], ok[i : i + chunk] = v, good
    return vals.reshape(t.shape), ok.reshape(t.shape)


def _w_raw(omega: GrowthFunction, t) -> tuple[np.ndarray, np.ndarray]:
    return _summed(omega, t, up=False)


def _tail_raw(omega: GrowthFunction, t) -> tuple[np.ndarray, np.ndarray]:
    return _summed(omega, t, up=True)


def w_transform(omega: GrowthFunction, t, tol: float = 1e-10):
    """W(t) = integral of omega(s) ds/s over (0, t).

    Raises DivergenceError when the dyadic partial sums toward the origin do
    not settle, i.e. when omega fails the Dini condition at 0.  ``tol`` is
    the target relative accuracy; the block rule meets 1e-12 on the catalog.
    """
    scalar = np.ndim(t) == 0
    vals, ok = _w_raw(omega, np.atleast_1d(np.asarray(t, dtype=float)))
    if not np.all(ok):
        bad = np.atleast_1d(t)[~ok][0]
        raise DivergenceError(f"W-transform of {omega.label} diverges near 0 (t={bad:g})")
    return float(vals[0]) if scalar else vals


def tail_transform(omega: GrowthFunction, t):
    """t * integral of omega(s)/s^2 over (t, inf); +inf where it diverges."""
    scalar = np.ndim(t) == 0
    vals, ok = _tail_raw(omega, np.atleast_1d(np.asarray(t, dtype=float)))
    vals = np.where(ok, vals, np.inf)
    return float(vals[0]) if scalar else vals


def w_function(omega: GrowthFunction, lo_exp: float = -330.0, hi_exp: float = 330.0) -> GrowthFunction:
    """W as a growth function in its own right.

    Values come from a cubic Hermite table in log s (the derivative
    dW/dlog s = omega(s) is known exactly); queries outside the table fall
    back to direct quadrature.
    """
    lo, hi = 2.0**lo_exp, 2.0**hi_exp
    u_lo, u_hi = np.log(lo), np.log(hi)
    n = int(round((hi_exp - lo_exp) * 32)) + 1
    u = np.linspace(u_lo, u_hi, n)
    cuts = [np.log(b) for b in omega.breakpoints]
    u = np.unique(np.concatenate([u, [c for c in cuts if u_lo < c < u_hi]]))
    w0 = w_transform(omega, lo)
    su, sw = split_blocks(u[:-1], u[1:], [], 16)
    inc = np.sum(omega(np.exp(su)) * sw, axis=-1)
    table = np.concatenate([[w0], w0 + np.cumsum(inc)])
    spline = CubicHermiteSpline(u, table, omega(np.exp(u)))

    def W(t):
        t = np.asarray(t, dtype=float)
        lu = np.log(t)
        inside = (lu >= u_lo) & (lu <= u_hi)
        out = np.empty_like(lu)
        out[inside] = spline(lu[inside])
        if np.any(~inside):
            out[~inside] = w_transform(omega, t[~inside])
        return out

    return GrowthFunction(W, f"W[{omega.label}]", {"base": omega.label}, omega.breakpoints)


# ---------------------------------------------------------------------------
# condition checks


@dataclass
class ConditionReport:
    label: str
    condition: str
    satisfied: bool
    constant: float
    witness_t: float
    grid: str
    failed: tuple[str, ...] = ()
    sub_constant: float | None = None

    def to_row(self) -> dict:
        return {
            "label": self.label,
            "condition": self.condition,
            "satisfied": self.satisfied,
            "constant": self.constant,
            "witness_t": self.witness_t,
        }


def scan_grid(seed: int = 0, points: int = GRID_POINTS, exps=SCAN_EXPONENTS) -> np.ndarray:
    """Fixed log grid plus seeded log-uniform points; sorted."""
    lo, hi = exps
    rng = np.random.default_rng(seed)
    e = np.concatenate([np.linspace(lo, hi, points), rng.uniform(lo, hi, points)])
    return np.sort(2.0**e)


def _grid_text(points=GRID_POINTS, exps=SCAN_EXPONENTS, seed=0):
    return (
        f"log2 t in [{exps[0]:g},{exps[1]:g}]: {points} uniform + {points} random (seed {seed}); "
        "constant is a lower bound of the sup"
    )


def _grows(values: np.ndarray) -> bool:
    """Detect an unbounded trend in ratios probed at geometrically spread scales.

    Convergent approaches to a limit have shrinking increments; logarithmic
    or power blow-up keeps them from shrinking.
    """
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        return True
    d = np.diff(v)
    if v[-1] <= v[0] * 1.05:
        return False
    return bool(d[-1] > 0 and d[-1] >= 0.5 * d[0])


_PROBES = 2.0 ** (20.0 + 10.0 * np.arange(5))


def _end_blowup(ratio: Callable[[np.ndarray], np.ndarray]) -> bool:
    return _grows(ratio(_PROBES)) or _grows(ratio(1.0 / _PROBES))


def check_condition_b(omega: GrowthFunction, seed: int = 0, points: int = GRID_POINTS) -> ConditionReport:
    """Estimate the best constant C_omega in t * int_t^inf omega(s)/s^2 ds <= C omega(t)."""
    t = scan_grid(seed, points)
    tail, ok = _tail_raw(omega, t)
    grid = _grid_text(points, seed=seed)
    if not np.all(ok):
        i = int(np.argmin(ok))
        return ConditionReport(omega.label, "b", False, np.inf, float(t[i]), grid, ("tail",))
    r = tail / omega(t)
    i = int(np.argmax(r))

    def ratio(s):
        v, good = _tail_raw(omega, s)
        return np.where(good, v, np.inf) / omega(s)

    blow = _end_blowup(ratio)
    return ConditionReport(
        omega.label, "b", not blow, np.inf if blow else float(r[i]), float(t[i]), grid, ("tail",) if blow else ()
    )


def check_condition_main(omega: GrowthFunction, seed: int = 0, points: int = GRID_POINTS) -> ConditionReport:
    """Estimate C_0 for W(t) + t int_t^inf omega/s^2 <= C_0 omega(t).

    ``sub_constant`` carries the estimate of C'_omega = sup W/omega.
    """
    t = scan_grid(seed, points)
    grid = _grid_text(points, seed=seed)
    W, okw = _w_raw(omega, t)
    T, okt = _tail_raw(omega, t)
    failed = []
    if not np.all(okw):
        failed.append("W")
    if not np.all(okt):
        failed.append("tail")
    if failed:
        return ConditionReport(omega.label, "main", False, np.inf, float(t[0]), grid, tuple(failed), np.inf)
    om = omega(t)
    total = (W + T) / om
    sub = W / om
    i = int(np.argmax(total))

    def w_ratio(s):
        v, good = _w_raw(omega, s)
        return np.where(good, v, np.inf) / omega(s)

    def t_ratio(s):
        v, good = _tail_raw(omega, s)
        return np.where(good, v, np.inf) / omega(s)

    if _end_blowup(w_ratio):
        failed.append("W")
    if _end_blowup(t_ratio):
        failed.append("tail")
    sat = not failed
    return ConditionReport(
        omega.label,
        "main",
        sat,
        float(total[i]) if sat else np.inf,
        float(t[i]),
        grid,
        tuple(failed),
        float(np.max(sub)) if "W" not in failed else np.inf,
    )


def dilation_indices(omega: GrowthFunction, n_s: int = 2049, n_t: int = 257) -> tuple[float, float]:
    """Lower and upper dilation indices from h(t) = sup_s omega(st)/omega(s)."""
    s = 2.0 ** np.linspace(-30.0, 30.0, n_s)
    os_ = omega(s)

    def h(t):
        return np.max(omega(np.outer(t, s)) / os_, axis=1)

    t_lo = 2.0 ** np.linspace(-20.0, -1.0 / 64, n_t)
    t_hi = 2.0 ** np.linspace(1.0 / 64, 20.0, n_t)
    lower = np.max(np.log(h(t_lo)) / np.log(t_lo))
    upper = np.min(np.log(h(t_hi)) / np.log(t_hi))
    return float(lower) + 0.0, float(upper) + 0.0


@dataclass
class QuasiReport:
    monotone_ratio: float
    doubling_ratio: float
    limit_ok: bool
    max_violation: float
    consistent: bool


def quasi_properties_report(
    omega: GrowthFunction, C_b: float, n_pairs: int = 10_000, seed: int = 0, tol: float = 1e-9
) -> QuasiReport:
    """Check the consequences of the tail condition on random scales.

    omega(t2)/t2 <= C_b omega(t1)/t1 for t1 <= t2; omega(2t) <= 2 C_b omega(t);
    omega(t)/t decreasing to 0 along t = 2^k.
    """
    rng = np.random.default_rng(seed)
    e = np.sort(rng.uniform(-40.0, 40.0, (n_pairs, 2)), axis=1)
    t1, t2 = 2.0 ** e[:, 0], 2.0 ** e[:, 1]
    mono = np.max((omega(t2) / t2) / (C_b * omega(t1) / t1))
    tt = 2.0 ** rng.uniform(-40.0, 40.0, n_pairs)
    doub = np.max(omega(2 * tt) / (2 * C_b * omega(tt)))
    k = 2.0 ** np.arange(0, 61)
    seq = omega(k) / k
    limit_ok = bool(np.all(seq[1:] <= C_b * seq[:-1] * (1 + tol)) and seq[-1] <= 1e-3 * seq[0])
    worst = float(max(mono, doub))
    return QuasiReport(float(mono), float(doub), limit_ok, worst, worst <= 1 + tol and limit_ok)
