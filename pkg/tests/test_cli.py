import csv
import hashlib
import json

import pytest

from holderlab.cli import main
from holderlab.config import ConfigError, parse_config

EXAMPLE6 = """
seed = 3
out_dir = "out"

[[scenarios]]
kind = "example6"
sample_budget = 50
"""


def _digests(path):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(path.iterdir()) if p.name != "manifest.json"}


def test_example6_files_and_determinism(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(EXAMPLE6)
    assert main(["run", str(cfg)]) == 0
    out = tmp_path / "out"
    names = {p.name for p in out.iterdir()}
    assert {"example6_H.csv", "example6_ratios.csv", "manifest.json"} <= names
    first = _digests(out)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["scenarios"][0]["verdict"] == "PASS"
    assert manifest["outputs"] == first
    assert main(["run", str(cfg)]) == 0
    assert _digests(out) == first


def test_verdict_derivable_from_csv(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(EXAMPLE6)
    main(["run", str(cfg), "--no-plots"])
    with open(tmp_path / "out" / "example6_checks.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(r["ok"] == "true" for r in rows)


def test_empty_run_writes_manifest_only(tmp_path):
    cfg = tmp_path / "empty.toml"
    cfg.write_text('out_dir = "o"\n')
    assert main(["run", str(cfg)]) == 0
    assert [p.name for p in (tmp_path / "o").iterdir()] == ["manifest.json"]


def test_config_validation():
    with pytest.raises(ConfigError):
        parse_config({"bogus": 1})
    with pytest.raises(ConfigError):
        parse_config({"scenarios": [{"kind": "nope"}]})
    with pytest.raises(ConfigError):
        parse_config({"scenarios": [{"kind": "fatou", "alpha": 1}]})
    with pytest.raises(ConfigError):
        parse_config({"scenarios": [{"kind": "fatou", "name": "a"}, {"kind": "jn", "name": "a"}]})
    cfg = parse_config({"scenarios": [{"kind": "fatou"}, {"kind": "fatou"}]})
    assert [s["name"] for s in cfg.scenarios] == ["fatou", "fatou1"]


def test_bad_toml_reports_error(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("seed = [")
    assert main(["run", str(cfg)]) == 2
    assert "error" in capsys.readouterr().err


def test_list_catalog(capsys):
    assert main(["list-catalog"]) == 0
    out = capsys.readouterr().out
    assert "example6" in out and "sqrt-abs" in out and "lame" in out


def test_check_growth(capsys):
    assert main(["check-growth", "example6", "alpha=0.5", "beta=0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    main_row = next(line for line in lines if ",main," in line)
    assert ",false," in main_row


def test_check_growth_missing_param(capsys):
    assert main(["check-growth", "power"]) == 2
