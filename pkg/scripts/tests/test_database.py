#!/usr/bin/env python3
"""
Run ledger against a temporary database.
"""
import pytest

from lib.database import delete_runs_before, get_run_artifacts, get_runs, record_artifact, record_run


@pytest.fixture
def db(tmp_path):
    return tmp_path / "ledger.db"


def test_record_and_read_runs(db):
    first = record_run("kernel", {"grid": "-1:1:3"}, "abc", 0, contracts_passed=4, db_path=db)
    second = record_run("verify", {}, "def", 1, contracts_failed=1, findings=2, db_path=db)
    runs = get_runs(db_path=db)
    assert [r["id"] for r in runs] == [second, first]
    assert get_runs("kernel", db_path=db)[0]["contracts_passed"] == 4
    assert runs[0]["finished_at"] is not None


def test_artifacts_upsert(db):
    run_id = record_run("spectrum", {}, "h", 0, db_path=db)
    record_artifact(run_id, "out/spectrum.csv", "aaa", 4, db_path=db)
    record_artifact(run_id, "out/spectrum.csv", "bbb", 5, db_path=db)
    record_artifact(run_id, "out/summary.json", "ccc", db_path=db)
    artifacts = get_run_artifacts(run_id, db_path=db)
    assert [(a["path"], a["sha256"], a["rows"]) for a in artifacts] == [
        ("out/spectrum.csv", "bbb", 5),
        ("out/summary.json", "ccc", None),
    ]


def test_delete_runs_before(db):
    run_id = record_run("evolve", {}, "h", 0, db_path=db)
    record_artifact(run_id, "x.csv", "s", 1, db_path=db)
    assert delete_runs_before("1970-01-01", db_path=db) == 0
    assert delete_runs_before("9999-01-01", db_path=db) == 1
    assert get_runs(db_path=db) == []
    assert get_run_artifacts(run_id, db_path=db) == []
