#!/usr/bin/env python3
"""
End-to-end runs through the command-line entry point.
"""
import csv
import json

import pytest

from lib.artifacts import sha256_file
from lib.cli import main


def _summary(root, command):
    return json.loads((root / command / "summary.json").read_text())


def test_invalid_measure_exits_two(tmp_path):
    argv = ["hypotheses", "--measure", "rational", "--alpha", "2", "--beta", "4", "--dim", "5"]
    assert main(argv + ["--output", str(tmp_path), "--no-ledger"]) == 2
    failure = json.loads((tmp_path / "hypotheses" / "failure.json").read_text())
    assert failure["error"] == "ParameterDomainError"


def test_unknown_config_key_exits_two(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"command": "kernel", "grdi": "0,1"}))
    assert main(["kernel", "--config", str(config), "--output", str(tmp_path), "--no-ledger"]) == 2


def test_kernel_cross_check_writes_csv(tmp_path):
    argv = ["kernel", "--grid", "-1:1:3", "--t", "0.5,1", "--output", str(tmp_path), "--no-ledger"]
    assert main(argv) == 0
    with open(tmp_path / "kernel" / "kernel_scan.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 3 * 3
    assert "agreement" in rows[0]
    assert all(row["agreement"] == "True" for row in rows)
    summary = _summary(tmp_path, "kernel")
    assert all(c["passed"] for c in summary["contracts"])
    assert "kernel_scan.csv" in summary["artifacts"]


def test_artifacts_are_reproducible(tmp_path):
    argv = ["kernel", "--methods", "spectral", "--t", "1", "--output", str(tmp_path), "--no-ledger"]
    assert main(argv) == 0
    digests = {p.name: sha256_file(p) for p in (tmp_path / "kernel").iterdir()}
    assert main(argv) == 0
    assert digests == {p.name: sha256_file(p) for p in (tmp_path / "kernel").iterdir()}


def test_gaussian_verify_passes(tmp_path):
    argv = ["verify", "--dim", "5", "--suite-size", "6", "--output", str(tmp_path), "--no-ledger"]
    assert main(argv) == 0
    summary = _summary(tmp_path, "verify")
    assert not (tmp_path / "verify" / "failure.json").exists()
    names = {c["name"] for c in summary["contracts"]}
    assert "constant_wiring" in names


def test_sharpness_below_threshold(tmp_path):
    argv = ["sharpness", "--dim", "5", "--c-factor", "0.9", "--output", str(tmp_path), "--no-ledger"]
    assert main(argv) == 0
    assert (tmp_path / "sharpness" / "lambda1.csv").exists()


def test_spectrum_records_ledger(tmp_path, monkeypatch):
    import lib.database as database

    monkeypatch.setattr(database, "DB_PATH", tmp_path / "ledger.db")
    argv = ["spectrum", "--measure", "power", "--m", "4", "--dim", "1", "--k", "3", "--output", str(tmp_path)]
    assert main(argv) == 0
    runs = database.get_runs("spectrum")
    assert len(runs) == 1 and runs[0]["exit_code"] == 0
    assert database.get_run_artifacts(runs[0]["id"])


@pytest.mark.parametrize(
    "flags",
    [["--measure", "gaussian"], ["--measure", "power", "--m", "4"], ["--measure", "squared_power"]],
)
def test_light_tail_spectrum_needs_wide_gap(tmp_path, flags):
    argv = ["spectrum", *flags, "--dim", "1", "--k", "3", "--output", str(tmp_path), "--no-ledger"]
    assert main(argv) == 0
    contract = next(c for c in _summary(tmp_path, "spectrum")["contracts"] if c["name"] == "simple_zero_eigenvalue")
    assert contract["passed"] and contract["min_gap"] == 0.1
    assert contract["gap"] > 0.1


def test_sharpness_above_threshold_reports_drop(tmp_path):
    argv = ["sharpness", "--dim", "5", "--c-factor", "1.05", "--output", str(tmp_path), "--no-ledger"]
    main(argv)
    finding = next(f for f in _summary(tmp_path, "sharpness")["findings"] if f["name"] == "total_drop")
    assert not finding["reaches_minus_ten"]
    assert f"{-finding['drop']:.3g}" in finding["message"]
