#!/usr/bin/env python3
"""
Deterministic artifact writers and the ordered pool.
"""
import json
import math
import time

import numpy as np

from lib.artifacts import canonical_json, ordered_map, sha256_file, thread_count, write_csv, write_json


def test_ordered_map_keeps_input_order():
    def slow(i):
        time.sleep(0.001 * (5 - i))
        return i * i

    assert ordered_map(slow, range(5)) == [0, 1, 4, 9, 16]
    assert ordered_map(slow, []) == []


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("BIKO_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("BIKO_THREADS", "many")
    assert thread_count() >= 1


def test_canonical_json_handles_numpy_and_non_finite():
    payload = {"b": np.float64(math.nan), "a": np.arange(3), "c": (np.inf, np.bool_(True))}
    data = json.loads(canonical_json(payload))
    assert data == {"schema_version": 1, "a": [0, 1, 2], "b": "nan", "c": ["inf", True]}
    assert canonical_json(payload) == canonical_json(dict(reversed(payload.items())))


def test_rewrites_are_byte_identical(tmp_path):
    rows = [[0.1, 1e-20, None], {"x": 2.0, "y": "k"}]
    write_csv(tmp_path / "a.csv", ["x", "y", "z"], rows)
    first = sha256_file(tmp_path / "a.csv")
    assert write_csv(tmp_path / "a.csv", ["x", "y", "z"], rows) == 2
    assert sha256_file(tmp_path / "a.csv") == first
    assert (tmp_path / "a.csv").read_text().splitlines() == ["x,y,z", "0.1,1e-20,", "2,k,"]

    write_json(tmp_path / "s.json", {"v": 1.5})
    digest = sha256_file(tmp_path / "s.json")
    write_json(tmp_path / "s.json", {"v": 1.5})
    assert sha256_file(tmp_path / "s.json") == digest
