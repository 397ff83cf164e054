"""Gauss-Legendre panel quadrature shared by every module.

All improper integrals in the package are evaluated in logarithmic
coordinates on dyadic blocks.  Blocks are split at the breakpoints of the
integrand so that kinks never sit inside a Gauss panel.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

LOG2 = np.log(2.0)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges: np.ndarray, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite rule for sorted panel edges along the last axis.

    ``edges`` has shape (..., E).  Returns nodes and weights of shape
    (..., (E - 1) * order).  Zero-width panels carry zero weight.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a = edges[..., :-1, None]
    h = np.diff(edges, axis=-1)[..., None]
    nodes = a + h * x
    weights = h * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def graded_panel_rule(edges: np.ndarray, left: np.ndarray, right: np.ndarray, order: int = 16):
    """Composite rule whose panels cluster nodes toward flagged endpoints.

    A panel flagged ``left`` uses x = a + h y^4, which turns an endpoint
    singularity like (x - a)^beta into the smooth y^(4 beta + 3).  ``right``
    mirrors this.  A panel flagged on both sides is halved and each half is
    graded toward its outer end with order/2 nodes.
    """
    if order % 2:
        raise ValueError("graded panels need an even order")
    edges = np.asarray(edges, dtype=float)
    y, w = gauss_legendre(order)
    yh, wh = gauss_legendre(order // 2)
    a = edges[..., :-1, None]
    h = np.diff(edges, axis=-1)[..., None]
    lf = np.asarray(left, dtype=bool)[..., None]
    rf = np.asarray(right, dtype=bool)[..., None]
    both, left, right = lf & rf, lf & ~rf, rf & ~lf
    half = np.concatenate([0.5 * yh**4, 1.0 - 0.5 * yh[::-1] ** 4])
    half_w = np.concatenate([2 * yh**3 * wh, 2 * yh[::-1] ** 3 * wh[::-1]])
    frac = np.where(both, half, np.where(left, y**4, np.where(right, 1.0 - (1.0 - y) ** 4, y)))
    wts = np.where(both, half_w, w * np.where(left, 4 * y**3, np.where(right, 4 * (1.0 - y) ** 3, 1.0)))
    shape = edges.shape[:-1] + (-1,)
    return (a + h * frac).reshape(shape), (h * wts).reshape(shape)


def split_blocks(lo: np.ndarray, hi: np.ndarray, cuts, order: int = 32, graded: bool = True):
    """Gauss rule on the intervals [lo, hi] split at every cut inside them.

    ``lo`` and ``hi`` broadcast together; ``cuts`` is a sequence of scalar
    split points (in the same coordinate).  Output shape is
    ``lo.shape + ((len(cuts) + 1) * order,)``.  With ``graded`` the panels
    touching a cut cluster their nodes toward it, so integrands with a
    power-type kink at a cut keep full accuracy.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    cuts = np.asarray(sorted(cuts), dtype=float)
    inner = np.clip(cuts, lo[..., None], hi[..., None]) if cuts.size else lo[..., None][..., :0]
    edges = np.concatenate([lo[..., None], inner, hi[..., None]], axis=-1)
    edges = np.sort(edges, axis=-1)
    if not (graded and cuts.size):
        return panel_rule(edges, order)
    at_cut = np.isin(edges, cuts)
    return graded_panel_rule(edges, at_cut[..., :-1], at_cut[..., 1:], order)


def geometric_tail(blocks: np.ndarray, rtol: float = 1e-6, check_at: int = 60):
    """Sum a sequence of dyadic block contributions with a geometric tail.

    ``blocks`` has shape (..., K).  The extrapolated partial sums
    S_k = sum_{j<=k} c_j + c_k r_k / (1 - r_k), with r_k = c_k / c_{k-1},
    are exact for power-type integrands.  Returns (value, converged): the
    extrapolated sum over all K blocks, and whether S_k Cauchy-converged to
    ``rtol`` (two consecutive steps) within the first ``check_at`` blocks.
    A block ratio at or above one yields an infinite value.
    """
    c = np.asarray(blocks, dtype=float)
    partial = np.cumsum(c, axis=-1)
    prev = c[..., :-1]
    cur = c[..., 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(prev > 0, cur / prev, 0.0)
        tail = np.where(r < 1.0, cur * r / (1.0 - r), np.inf)
        tail = np.where(cur == 0.0, 0.0, tail)
        s = partial[..., 1:] + tail
        steps = np.abs(np.diff(s, axis=-1))
        ok = np.isfinite(s[..., 1:]) & (steps <= rtol * np.abs(s[..., 1:]))
    ok2 = ok[..., 1:] & ok[..., :-1]
    converged = ok2[..., : max(check_at - 2, 1)].any(axis=-1) & np.isfinite(s[..., -1])
    return s[..., -1], converged
