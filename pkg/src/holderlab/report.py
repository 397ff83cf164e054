"""Scenario execution and report emission (CSV tables, SVG plots, JSON manifest)."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import scenarios as sc
from .config import RunConfig, build_datum, build_growth, build_sweep, kernel_for, resolve


@dataclass
class Outcome:
    result: sc.ScenarioResult | None
    seconds: float
    error: str | None = None

    @property
    def verdict(self) -> str:
        return "ERROR" if self.result is None else self.result.verdict


def run_scenario(spec: dict, seed: int) -> sc.ScenarioResult:
    """Build the inputs of one resolved scenario table and run it."""
    kind = spec["kind"]
    name = spec.get("name", kind)
    if kind == "example6":
        return sc.scenario_example6(spec.get("alpha", 0.5), spec.get("beta", 0.5), spec.get("sample_budget", 1000), seed, name)
    if kind == "jn" and spec.get("variant", "bmo") == "bmo":
        return sc.scenario_jn("bmo", spec.get("alpha", 1 / np.e), spec.get("q", 2.0), spec.get("function", "log-inv"), name=name)
    K = kernel_for(spec["system"])
    f = build_datum(spec["datum"], K.n)
    if kind == "fatou":
        return sc.scenario_fatou(
            K, f, spec.get("s", 0.5), spec.get("t", 1.0), spec.get("n_xi", 100), seed, name,
            spec.get("symbol_tol", 1e-10), spec.get("slice_tol", 1e-5),
        )
    omega = build_growth(spec["growth"])
    if kind == "jn":
        return sc.scenario_jn(
            "conical", spec.get("alpha", 0.5), spec.get("q", 2.0), K=K, omega=omega, f=f,
            root_corner=spec.get("root_corner", [-1.0] * (K.n - 1)), root_side=spec.get("root_side", 2.0),
            depth=spec.get("depth", 3), cells_per_axis=spec.get("cells_per_axis", 16), name=name,
        )
    sweep = build_sweep(spec["sweep"], K.n - 1, seed)
    pairs = {"seed": seed, **spec["pairs"]}
    if kind == "dirichlet":
        return sc.scenario_dirichlet(spec.get("type", "holder"), K, omega, f, sweep, spec.get("p", 1.0), spec.get("q", 2.0), pairs, name)
    if kind == "equivalence":
        return sc.scenario_equivalence(K, omega, f, sweep, tuple(spec.get("qs", (1.0, 2.0, 4.0))), pairs, spec.get("per_octave", 4), name)
    raise ValueError(f"unknown scenario kind {kind!r}")


def _timed(spec: dict, seed: int) -> Outcome:
    start = time.perf_counter()
    try:
        res = run_scenario(spec, seed)
    except (ValueError, ArithmeticError, NotImplementedError) as exc:
        return Outcome(None, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
    return Outcome(res, time.perf_counter() - start)


def run_all(cfg: RunConfig) -> list[tuple[dict, Outcome]]:
    """Run every scenario, in a bounded process pool when workers > 1; order follows the config."""
    specs = [resolve(s, cfg.defaults) for s in cfg.scenarios]
    if cfg.workers > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(specs))) as pool:
            outcomes = list(pool.map(_timed, specs, [cfg.seed] * len(specs)))
    else:
        outcomes = [_timed(s, cfg.seed) for s in specs]
    return list(zip(specs, outcomes))


# ---------------------------------------------------------------------------
# emission


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_bytes(rows: list[dict]) -> bytes:
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c, "")) for c in cols])
    return buf.getvalue().encode("utf-8")


def svg_bytes(plot: sc.PlotSpec) -> bytes:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "holderlab", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, x, y in plot.series:
            ax.plot(x, y, marker="o", ms=3, label=label)
        ax.set_xscale("log" if plot.logx else "linear")
        ax.set_yscale("log" if plot.logy else "linear")
        ax.set(title=plot.title, xlabel=plot.xlabel, ylabel=plot.ylabel)
        if len(plot.series) > 1:
            ax.legend(fontsize=7)
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def _versions() -> dict:
    import matplotlib
    import scipy

    return {
        "holderlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "matplotlib": matplotlib.__version__,
        "python": platform.python_version(),
    }


def scenario_files(res: sc.ScenarioResult, plots: bool = True) -> dict[str, bytes]:
    files = {f"{res.name}_{key}.csv": csv_bytes(rows) for key, rows in res.tables.items()}
    files[f"{res.name}_checks.csv"] = csv_bytes(res.checks)
    summary = [{"quantity": k, "value": v} for k, v in res.metrics.items()]
    summary.append({"quantity": "degenerate", "value": res.degenerate})
    files[f"{res.name}_summary.csv"] = csv_bytes(summary)
    if plots:
        for p in res.plots:
            files[f"{p.name}.svg"] = svg_bytes(p)
    return files


def emit_report(cfg: RunConfig, outcomes: list[tuple[dict, Outcome]], plots: bool = True) -> dict:
    """Write all outputs to ``cfg.out_dir`` and return the manifest."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hashes, entries = {}, []
    for spec, oc in outcomes:
        files = scenario_files(oc.result, plots) if oc.result is not None else {}
        for fname, blob in files.items():
            (out / fname).write_bytes(blob)
            hashes[fname] = hashlib.sha256(blob).hexdigest()
        entries.append(
            {
                "name": spec["name"],
                "kind": spec["kind"],
                "verdict": oc.verdict,
                "seconds": round(oc.seconds, 3),
                "files": sorted(files),
                **({"error": oc.error} if oc.error else {}),
            }
        )
    manifest = {
        "config_sha256": cfg.digest,
        "config_path": str(cfg.source) if cfg.source else None,
        "seed": cfg.seed,
        "workers": cfg.workers,
        "versions": _versions(),
        "scenarios": entries,
        "outputs": dict(sorted(hashes.items())),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n", encoding="utf-8")
    return manifest
