"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line with its runtime.

Run with pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from holderlab import growthfn as gf
from holderlab import scenarios as sc
from holderlab.dyadic import Root, stopping_decomposition
from holderlab.elliptic import ellipticity_constant, make_lame, make_laplacian
from holderlab.extension import conical_square, datum_catalog, extend, linear_field
from holderlab.poisson import PoissonKernel, kernel_grid, laplacian_kernel, semigroup_residual, spectral_symbol
from holderlab.seminorms import (
    Cube,
    CubeSweep,
    holder_seminorm,
    luxemburg_norm,
    morrey_campanato_seminorm,
    osc_p,
    star2_q,
)

RESULTS: list[str] = []
HOLDER_DATA = ("sqrt-abs", "signed-sqrt", "sqrt-diff", "cos", "log1p-abs")
SQRT = gf.catalog("power", alpha=0.5)


def report(number: int, title: str, budget: float, body) -> None:
    """Run ``body`` (returns (ok, detail)), record a line and assert."""
    start = time.perf_counter()
    ok, detail = body()
    secs = time.perf_counter() - start
    within = secs <= budget
    verdict = "PASS" if ok and within else "FAIL"
    line = f"[{verdict}] criterion {number}: {title} ({secs:.1f}s of {budget:.0f}s) {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line
    assert within, line


# ---------------------------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(1)
    L2 = make_laplacian(2)
    worst = 0.0
    for _ in range(1000):
        xi = rng.normal(size=1) * rng.choice([0.01, 1.0, 100.0])
        t = rng.uniform(0.0, 3.0)
        worst = max(worst, abs(spectral_symbol(L2, xi, t)[0, 0] / np.exp(-t * abs(xi[0])) - 1))
    g = kernel_grid(PoissonKernel(L2, "spectral"), 1.0)
    c = g.coords
    inner = np.abs(c) < c.max() / 2
    grid_err = float(np.abs(g.values[inner, 0, 0] - laplacian_kernel(2, c[inner])).max())
    defect = lambda K: float(np.abs(kernel_grid(K, 1.0).integral - np.eye(K.M)).max())
    d2 = max(defect(PoissonKernel(L2, "spectral")), defect(PoissonKernel(make_lame(2, 1, 1)[0])))
    d3 = max(defect(PoissonKernel(make_laplacian(3), "spectral")), defect(PoissonKernel(make_lame(3, 1, 1)[0])))
    ok = worst <= 1e-10 and grid_err <= 1e-6 and d2 <= 1e-6 and d3 <= 1e-4
    return ok, f"symbol {worst:.1e}, grid {grid_err:.1e}, defect n=2 {d2:.1e}, n=3 {d3:.1e}"


def criterion_2():
    rng = np.random.default_rng(2)
    worst, sign_ok = 0.0, True
    for _ in range(20):
        mu = complex(rng.uniform(0.2, 2.0), rng.uniform(-1.0, 1.0))
        lam = complex(rng.uniform(-4.0, 2.0), rng.uniform(-1.0, 1.0))
        L, admissible = make_lame(2, mu, lam)
        k = ellipticity_constant(L)
        target = min(mu.real, (2 * mu + lam).real)
        worst = max(worst, abs(k - target))
        if abs((2 * mu + lam).real) > 0.05:
            sign_ok &= (k > 0) == admissible
    return worst <= 1e-2 and sign_ok, f"max |kappa - min(Re mu, Re(2mu+lam))| = {worst:.1e}, signs agree: {sign_ok}"


def criterion_3():
    details, ok = [], True
    for a in (0.25, 0.5, 0.75):
        om = gf.catalog("power", alpha=a)
        C = gf.check_condition_b(om).constant
        t = 2.0 ** np.linspace(-20, 20, 41)
        W = gf.w_transform(om, t)
        lo, hi = gf.dilation_indices(om)
        good = abs(C * (1 - a) - 1) <= 0.02 and np.max(np.abs(W / (t**a / a) - 1)) <= 1e-8
        good &= abs(lo - a) <= 0.01 and abs(hi - a) <= 0.01
        ok &= bool(good)
        details.append(f"a={a}: C={C:.4f}")
    e6 = gf.catalog("example6", alpha=0.5, beta=0.5)
    e6_ok = (
        not gf.check_condition_main(e6).satisfied
        and gf.check_condition_b(e6).satisfied
        and np.isfinite(gf.w_transform(e6, 1.0))
    )
    details.append(f"example6 (a),(b) hold and (main) fails: {e6_ok}")
    return ok and e6_ok, "; ".join(details)


def criterion_4():
    r = sc.scenario_example6(0.5, 0.5, 1000, 0)
    failed = [c["check"] for c in r.checks if not c["ok"]]
    m = r.metrics
    return not failed, f"sup H/omega {m['sup_H_over_omega']:.4f} -> {m['sup_H_over_omega_doubled']:.4f}, failed: {failed}"


def _exhaustive(mask, depth, beta):
    out = []

    def visit(level, idx):
        m = 2 ** (depth - level)
        if mask[tuple(slice(i * m, (i + 1) * m) for i in idx)].mean() > beta:
            out.append((level, idx))
        elif level < depth:
            for off in np.ndindex(*(2,) * len(idx)):
                visit(level + 1, tuple(2 * i + o for i, o in zip(idx, off)))

    visit(0, (0,) * mask.ndim)
    return sorted(out)


def criterion_5():
    r = sc.scenario_jn("bmo", 1 / np.e, 2.0, "log-inv")
    jn_ok = all(c["ok"] for c in r.checks)
    rng = np.random.default_rng(5)
    matches = 0
    for i in range(50):
        dim, depth = (1, 10) if i % 2 == 0 else (2, 6)
        mask = rng.random((2**depth,) * dim) < rng.uniform(0.01, 0.3)
        beta = rng.uniform(max(mask.mean(), 0.02) + 1e-9, 0.98)
        s = stopping_decomposition(mask, Root((0.0,) * dim, 1.0, depth), beta)
        matches += sorted((q.level, q.index) for q in s.cubes) == _exhaustive(mask, depth, beta) and s.union_matches
    xi_rows = len(r.tables["profile"])
    return jn_ok and matches == 50 and xi_rows == 20, (
        f"JN checks {jn_ok} on {xi_rows} grid points, m_1/e={r.metrics['m_alpha']:.4f}, stopping oracle {matches}/50"
    )


def criterion_6():
    lap, lame = PoissonKernel(make_laplacian(2)), PoissonKernel(make_lame(2, 1, 1)[0])
    a = sc.scenario_fatou(lap, datum_catalog("cos"), seed=6)
    b = sc.scenario_fatou(lame, datum_catalog("vector-cos"), seed=6, slice_tol=1e-4)
    ok = a.verdict == "PASS" and b.verdict == "PASS"
    return ok, (
        f"symbol {a.metrics['symbol_residual']:.1e}/{b.metrics['symbol_residual']:.1e}, "
        f"slice {a.metrics['slice_residual']:.1e} (Laplacian), {b.metrics['slice_residual']:.1e} (Lame)"
    )


def criterion_7():
    K = PoissonKernel(make_laplacian(2))
    sweep = CubeSweep((-1.0,), 2.0, (0, 4), 8)
    pairs = {"budget": 2000, "sep_exps": (-8, 2), "anchor_exps": (-6, 3), "t_exps": (-8, 1)}
    bad, worst = [], 1.0
    for name in HOLDER_DATA:
        r = sc.scenario_equivalence(K, SQRT, datum_catalog(name), sweep, pairs=pairs, name=name)
        bad += [f"{name}: {c['check']}" for c in r.checks if not c["ok"]]
        for row in r.tables["ratios"]:
            worst = max(worst, row["ratio"], 1 / row["ratio"])
    return not bad, f"5 data, widest ratio {worst:.2f}, failed: {bad}"


def criterion_8():
    lux = luxemburg_norm(lambda x: np.full(len(x), 2.0), Cube((0.0,), 1.0))
    s2 = star2_q(linear_field(), gf.linear(), 2.0, CubeSweep((0.0,), 4.0, (0, 3), 4)).value
    cone = conical_square(linear_field(), [[0.0]], 1.0, 3.0)[0]
    ext = extend(PoissonKernel(make_laplacian(2)), datum_catalog("cos"), [[0.0, 1.0]]).values[0, 0]
    errs = [abs(lux - 2 / np.log(2)), abs(s2 - 1 / np.sqrt(2)), abs(cone - 3.0), abs(ext - np.exp(-1))]
    ok = errs[0] <= 1e-8 and all(e <= 1e-6 for e in errs[1:])
    return ok, "errors " + ", ".join(f"{e:.1e}" for e in errs)


def criterion_9():
    sweep = CubeSweep((-2.0,), 4.0, (0, 6), 8)
    osc_worst = 0.0
    osc_order = True
    for name in ("cos", "vector-cos", "sqrt-abs", "signed-sqrt", "sqrt-diff", "log1p-abs", "linear", "logplus-x1"):
        f = datum_catalog(name)
        for r in (2.0**-4, 0.5, 4.0):
            o1, o2 = osc_p(f, 1, r, sweep).value, osc_p(f, 2, r, sweep).value
            osc_order &= o1 <= o2 * (1 + 1e-12)
            if o1 > 0:
                osc_worst = max(osc_worst, o2 / o1)
    C = gf.check_condition_b(SQRT).constant
    incl_ok = True
    for name in HOLDER_DATA:
        f = datum_catalog(name)
        E = morrey_campanato_seminorm(f, SQRT, 1.0, sweep).value
        H = holder_seminorm(f, SQRT, 1, 2000, 0).value
        incl_ok &= E <= C * H
    w_worst = 0.0
    for om in (
        gf.catalog("power", alpha=0.25),
        gf.catalog("power", alpha=0.75),
        gf.catalog("power-logplus", alpha=0.5, theta=1.0),
        gf.catalog("min-powers", alpha=0.25, beta=0.75),
        gf.catalog("max-powers", alpha=0.25, beta=0.75),
        gf.catalog("example6", alpha=0.5, beta=0.5),
    ):
        Cw = gf.check_condition_b(om).constant
        CW = gf.check_condition_b(gf.w_function(om)).constant
        w_worst = max(w_worst, CW / (1.05 * (1 + Cw**2)))
    ok = osc_order and osc_worst <= 5 and incl_ok and w_worst <= 1
    return ok, f"osc2/osc1 <= {osc_worst:.3f}, E <= C[f]: {incl_ok}, max C_W / 1.05(1+C^2) = {w_worst:.3f}"


CRITERIA = [
    (1, "kernel exactness", 30, criterion_1),
    (2, "ellipticity oracle", 60, criterion_2),
    (3, "growth constants", 10, criterion_3),
    (4, "example 6 reproduction", 120, criterion_4),
    (5, "John-Nirenberg", 60, criterion_5),
    (6, "Fatou / semigroup", 60, criterion_6),
    (7, "equivalence table", 600, criterion_7),
    (8, "closed-form micro-values", 60, criterion_8),
    (9, "seminorm lemmas", 120, criterion_9),
]


@pytest.mark.parametrize("number,title,budget,body", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, budget, body):
    report(number, title, budget, body)


if __name__ == "__main__":
    failures = 0
    for number, title, budget, body in CRITERIA:
        try:
            report(number, title, budget, body)
        except AssertionError:
            failures += 1
    raise SystemExit(1 if failures else 0)
