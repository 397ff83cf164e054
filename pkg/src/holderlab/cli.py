"""Command line entry point: ``lab run``, ``lab list-catalog``, ``lab check-growth``."""
from __future__ import annotations

import argparse
import sys

from . import growthfn as gf
from .config import ConfigError, build_growth, load_config
from .extension import DATUM_NAMES
from .report import csv_bytes, emit_report, run_all

SYSTEM_KINDS = ("laplacian", "lame", "scalar-divA", "tensor")
GROWTH_PARAMS = {
    "power": "alpha",
    "power-logplus": "alpha theta",
    "power-loginv": "alpha theta",
    "min-powers": "alpha beta",
    "max-powers": "alpha beta",
    "example6": "alpha beta",
    "linear": "",
    "one": "",
}


def _param(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{key}: {value!r} is not a number") from None


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    outcomes = run_all(cfg)
    manifest = emit_report(cfg, outcomes, plots=not args.no_plots)
    for entry in manifest["scenarios"]:
        line = f"{entry['name']:<24} {entry['verdict']:<16} {entry['seconds']:8.2f}s"
        if "error" in entry:
            line += f"  {entry['error']}"
        print(line)
    print(f"outputs in {cfg.out_dir}")
    return 0 if all(e["verdict"].startswith("PASS") for e in manifest["scenarios"]) else 1


def cmd_list(args) -> int:
    print("growth functions:")
    for name, params in GROWTH_PARAMS.items():
        print(f"  {name:<14} {params}")
    print("boundary data:")
    for name in DATUM_NAMES:
        print(f"  {name}")
    print("systems:")
    for kind in SYSTEM_KINDS:
        print(f"  {kind}")
    return 0


def cmd_check_growth(args) -> int:
    omega = build_growth({"name": args.name, **dict(args.params)})
    rows = []
    try:
        W1 = float(gf.w_transform(omega, 1.0))
        rows.append({"label": omega.label, "condition": "a", "satisfied": True, "constant": W1, "witness_t": 1.0})
    except gf.DivergenceError:
        rows.append({"label": omega.label, "condition": "a", "satisfied": False, "constant": float("inf"), "witness_t": 1.0})
    rows.append(gf.check_condition_b(omega).to_row())
    rows.append(gf.check_condition_main(omega).to_row())
    lo, hi = gf.dilation_indices(omega)
    rows.append({"label": omega.label, "condition": "dilation-indices", "lower_index": lo, "upper_index": hi})
    sys.stdout.write(csv_bytes(rows).decode())
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the scenarios of a TOML configuration")
    r.add_argument("config")
    r.add_argument("--workers", type=int, default=None, help="override the worker count of the config")
    r.add_argument("--no-plots", action="store_true", help="skip SVG output")
    r.set_defaults(func=cmd_run)
    sub.add_parser("list-catalog", help="list growth functions, data and systems").set_defaults(func=cmd_list)
    c = sub.add_parser("check-growth", help="conditions (a), (b), (main) and dilation indices of a growth function")
    c.add_argument("name", choices=sorted(GROWTH_PARAMS))
    c.add_argument("params", nargs="*", type=_param, metavar="key=value")
    c.set_defaults(func=cmd_check_growth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
