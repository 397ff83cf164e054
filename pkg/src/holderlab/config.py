"""Run configuration: TOML loading, validation and object construction.

Top-level keys: ``system``, ``growth``, ``datum``, ``sweep``, ``pairs``,
``scenarios`` (array of tables), ``seed``, ``out_dir``, ``workers``.
Each scenario table needs ``kind`` and may override any of the shared
tables; remaining keys are scenario parameters.
"""
from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import growthfn as gf
from .elliptic import EllipticSystem, make_lame, make_laplacian, make_scalar_div, make_system
from .extension import BoundaryDatum, datum_catalog
from .poisson import PoissonKernel
from .seminorms import CubeSweep

SHARED = ("system", "growth", "datum", "sweep", "pairs")
KINDS = {
    "dirichlet": {"name", "type", "p", "q"},
    "equivalence": {"name", "qs", "per_octave"},
    "fatou": {"name", "s", "t", "n_xi", "symbol_tol", "slice_tol"},
    "example6": {"name", "alpha", "beta", "sample_budget"},
    "jn": {"name", "variant", "alpha", "q", "function", "depth", "cells_per_axis", "root_corner", "root_side"},
}
TOP_LEVEL = set(SHARED) | {"scenarios", "seed", "out_dir", "workers"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    raw: dict
    scenarios: list[dict]
    seed: int = 0
    out_dir: Path = Path("out")
    workers: int = 1
    source: Path | None = None
    digest: str = ""
    defaults: dict = field(default_factory=dict)


def canonical_hash(data: dict) -> str:
    """SHA-256 of the configuration serialized with sorted keys."""
    blob = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def parse_config(data: dict, source: Path | None = None) -> RunConfig:
    unknown = set(data) - TOP_LEVEL
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    scenarios = data.get("scenarios", [])
    if not isinstance(scenarios, list):
        raise ConfigError("scenarios must be an array of tables")
    names: set[str] = set()
    named = []
    for i, sc in enumerate(scenarios):
        kind = sc.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"scenario {i}: kind must be one of {sorted(KINDS)}, got {kind!r}")
        extra = set(sc) - KINDS[kind] - set(SHARED) - {"kind"}
        if extra:
            raise ConfigError(f"scenario {i} ({kind}): unknown keys {sorted(extra)}")
        name = sc.get("name", kind if kind not in names else f"{kind}{i}")
        if name in names:
            raise ConfigError(f"duplicate scenario name {name!r}")
        names.add(name)
        named.append({**sc, "name": name})
    seed = data.get("seed", 0)
    workers = data.get("workers", 1)
    if not isinstance(seed, int) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("seed must be an integer and workers a positive integer")
    base = source.parent if source is not None else Path.cwd()
    out = Path(data.get("out_dir", "out"))
    return RunConfig(
        data, named, seed, out if out.is_absolute() else base / out, workers, source, canonical_hash(data),
        {k: data[k] for k in SHARED if k in data},
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    with path.open("rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data, path)


# ---------------------------------------------------------------------------
# builders


def build_system(spec: dict) -> EllipticSystem:
    kind = spec.get("kind", "laplacian")
    if kind == "laplacian":
        return make_laplacian(int(spec.get("n", 2)))
    if kind == "lame":
        L, ok = make_lame(int(spec.get("n", 2)), _complex(spec.get("mu", 1.0)), _complex(spec.get("lam", 1.0)))
        if not ok:
            raise ConfigError(f"Lame parameters {spec} are not strongly elliptic")
        return L
    if kind == "scalar-divA":
        return make_scalar_div(np.array([[_complex(v) for v in row] for row in spec["A"]]))
    if kind == "tensor":
        n, M = int(spec["n"]), int(spec["M"])
        a = np.asarray(spec["coeff"], dtype=float)
        return make_system(n, M, a[..., 0] + 1j * a[..., 1], spec.get("label", "tensor"))
    raise ConfigError(f"unknown system kind {kind!r}")


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def build_growth(spec: dict) -> gf.GrowthFunction:
    params = {k: v for k, v in spec.items() if k != "name"}
    name = spec.get("name", "power")
    if name == "linear":
        return gf.linear()
    if name == "one":
        return gf.constant_one()
    try:
        return gf.catalog(name, **params)
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"growth {name}: missing or bad parameter {exc}") from exc


def build_datum(spec: dict, n: int) -> BoundaryDatum:
    params = {k: v for k, v in spec.items() if k != "name"}
    return datum_catalog(spec.get("name", "cos"), n, **params)


def build_sweep(spec: dict, dim: int, seed: int) -> CubeSweep:
    corner = tuple(float(c) for c in spec.get("root_corner", [-1.0] * dim))
    if len(corner) != dim:
        raise ConfigError(f"sweep root_corner has {len(corner)} entries, expected {dim}")
    return CubeSweep(
        corner, float(spec.get("root_side", 2.0)), tuple(spec.get("levels", [0, 4])), int(spec.get("offsets_per_level", 8)),
        int(spec.get("seed", seed)),
    )


def resolve(scenario: dict, defaults: dict) -> dict:
    """Scenario table with shared tables filled in from the top level."""
    out = dict(scenario)
    for key in SHARED:
        merged = dict(defaults.get(key, {}))
        merged.update(scenario.get(key, {}))
        out[key] = merged
    return out


def kernel_for(spec: dict) -> PoissonKernel:
    return PoissonKernel(build_system(spec))
