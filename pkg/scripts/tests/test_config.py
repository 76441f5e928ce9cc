#!/usr/bin/env python3
"""
Strict run configs and command-line overrides.
"""
import argparse
import json

import numpy as np
import pytest

from lib.config import (
    CONFIG_DIR,
    MeasureConfig,
    RunConfig,
    load_measure_config,
    load_run_config,
    merge_cli_overrides,
    parse_grid,
    run_config_from_dict,
)
from lib.errors import ConfigError


def test_parse_grid():
    assert np.allclose(parse_grid("-1:1:3"), [-1, 0, 1])
    assert np.allclose(parse_grid("0.5, 2"), [0.5, 2])
    with pytest.raises(ValueError):
        parse_grid("0:1")
    with pytest.raises(ValueError):
        parse_grid("0:1:0")


def test_strict_parsing():
    with pytest.raises(ConfigError):
        run_config_from_dict({"command": "kernel", "gird": "-1:1:3"})
    with pytest.raises(ConfigError):
        run_config_from_dict({"command": "dance"})
    with pytest.raises(ConfigError):
        run_config_from_dict({"grid": "-1:1:3"})
    with pytest.raises(ConfigError):
        run_config_from_dict({"command": "kernel", "methods": "fourier"})
    with pytest.raises(ConfigError):
        run_config_from_dict({"command": "verify", "suite_size": 2.5})
    with pytest.raises(ConfigError):
        MeasureConfig.from_dict({"family": "power", "dim": 3})


def test_times_must_increase():
    config = run_config_from_dict({"command": "evolve", "times": [2, 1]})
    with pytest.raises(ConfigError):
        config.time_grid
    assert RunConfig("positivity").time_grid[-1] == 20.0


def test_config_hash_ignores_output():
    a = run_config_from_dict({"command": "kernel", "output": "/tmp/a"})
    b = run_config_from_dict({"command": "kernel", "output": "/tmp/b", "ledger": False})
    c = run_config_from_dict({"command": "kernel", "grid": "0,1"})
    assert a.config_hash == b.config_hash != c.config_hash


def test_shipped_configs_load():
    assert load_measure_config("rational_n5.json").build().dimension == 5
    sharp = load_run_config(CONFIG_DIR / "sharpness_n5.json")
    assert sharp.command == "sharpness" and sharp.measure.family == "gaussian"


def test_run_config_file_roundtrip(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"command": "spectrum", "measure": {"family": "power", "dimension": 1, "params": {"m": 4}}, "k": 3}))
    config = load_run_config(path)
    assert config.k == 3 and config.measure.params == {"m": 4.0}
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "missing.json")


def _namespace(**values):
    return argparse.Namespace(**values)


def test_overrides_rebuild_measure():
    base = run_config_from_dict(
        {"command": "hypotheses", "measure": {"family": "rational", "dimension": 5, "params": {"alpha": 2, "beta": 8}}}
    )
    same_family = merge_cli_overrides(base, _namespace(command="hypotheses", beta=9.0))
    assert same_family.measure.params == {"alpha": 2.0, "beta": 9.0}
    switched = merge_cli_overrides(base, _namespace(command="hypotheses", measure="power", m=4.0))
    assert switched.measure == MeasureConfig("power", 5, {"m": 4.0})


def test_overrides_flags():
    config = merge_cli_overrides(None, _namespace(command="kernel", t="0.25,1", grid="-2:2:5", no_ledger=True))
    assert config.times == (0.25, 1.0)
    assert config.ledger is False
    assert len(config.grid_points) == 5
    with pytest.raises(ConfigError):
        merge_cli_overrides(config, _namespace(command="verify"))
    with pytest.raises(ConfigError):
        merge_cli_overrides(None, _namespace(command="positivity", path="fourier"))
