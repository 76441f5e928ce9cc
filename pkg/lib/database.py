"""
SQLite run ledger.

Database lives at data/biko.db (override with BIKO_DB).
Tables: runs, artifacts.
"""

import json
import logging
import os
import sqlite3
from contextlib import contextmanager
from pathlib import Path

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent.parent / "data"
DB_PATH = Path(os.environ.get("BIKO_DB", DATA_DIR / "biko.db"))

# --- Schema ---

_SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
    id                INTEGER PRIMARY KEY AUTOINCREMENT,
    command           TEXT NOT NULL,            -- evolve, kernel, verify, ...
    config_hash       TEXT NOT NULL,            -- sha256 of the canonical config JSON
    config_json       TEXT NOT NULL,
    exit_code         INTEGER,                  -- 0 ok, 1 contract violation, 2 config error
    contracts_passed  INTEGER DEFAULT 0,
    contracts_failed  INTEGER DEFAULT 0,
    findings          INTEGER DEFAULT 0,        -- soft findings (witnesses, constants)
    output_dir        TEXT,
    started_at        TEXT NOT NULL DEFAULT (datetime('now')),
    finished_at       TEXT
);

CREATE TABLE IF NOT EXISTS artifacts (
    id          INTEGER PRIMARY KEY AUTOINCREMENT,
    run_id      INTEGER NOT NULL REFERENCES runs(id) ON DELETE CASCADE,
    path        TEXT NOT NULL,
    sha256      TEXT NOT NULL,
    rows        INTEGER,                        -- CSV data rows; NULL for JSON
    UNIQUE(run_id, path)
);
"""


def _resolve(db_path: Path | str | None) -> Path:
    return Path(db_path) if db_path is not None else DB_PATH


def init_db(db_path: Path | str | None = None) -> None:
    """Create database and tables if they don't exist."""
    path = _resolve(db_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with get_db(path) as db:
        db.executescript(_SCHEMA)


@contextmanager
def get_db(db_path: Path | str | None = None):
    """Yield a sqlite3 connection with row_factory = Row."""
    conn = sqlite3.connect(str(_resolve(db_path)))
    conn.row_factory = sqlite3.Row
    conn.execute("PRAGMA journal_mode=WAL")
    conn.execute("PRAGMA foreign_keys=ON")
    try:
        yield conn
        conn.commit()
    finally:
        conn.close()


# --- Runs ---


def record_run(
    command: str,
    config: dict,
    config_hash: str,
    exit_code: int,
    contracts_passed: int = 0,
    contracts_failed: int = 0,
    findings: int = 0,
    output_dir: str | None = None,
    db_path: Path | str | None = None,
) -> int:
    """Insert a finished run and return its id."""
    init_db(db_path)
    with get_db(db_path) as db:
        cursor = db.execute(
            """
            INSERT INTO runs (command, config_hash, config_json, exit_code,
                              contracts_passed, contracts_failed, findings,
                              output_dir, finished_at)
            VALUES (?, ?, ?, ?, ?, ?, ?, ?, datetime('now'))
            """,
            (
                command,
                config_hash,
                json.dumps(config, sort_keys=True),
                exit_code,
                contracts_passed,
                contracts_failed,
                findings,
                output_dir,
            ),
        )
        run_id = cursor.lastrowid
    logger.info("Recorded run %d (%s, exit %d)", run_id, command, exit_code)
    return run_id


def get_runs(command: str | None = None, limit: int = 50, db_path: Path | str | None = None) -> list[dict]:
    """Most recent runs first, optionally for one command."""
    init_db(db_path)
    with get_db(db_path) as db:
        if command:
            rows = db.execute(
                "SELECT * FROM runs WHERE command = ? ORDER BY id DESC LIMIT ?",
                (command, limit),
            ).fetchall()
        else:
            rows = db.execute("SELECT * FROM runs ORDER BY id DESC LIMIT ?", (limit,)).fetchall()
        return [dict(r) for r in rows]


def delete_runs_before(cutoff: str, db_path: Path | str | None = None) -> int:
    """Delete runs started before cutoff (YYYY-MM-DD) and their artifacts. Returns rows deleted."""
    init_db(db_path)
    with get_db(db_path) as db:
        db.execute(
            "DELETE FROM artifacts WHERE run_id IN (SELECT id FROM runs WHERE started_at < ?)",
            (cutoff,),
        )
        cursor = db.execute("DELETE FROM runs WHERE started_at < ?", (cutoff,))
        return cursor.rowcount


# --- Artifacts ---


def record_artifact(
    run_id: int,
    path: str,
    sha256: str,
    rows: int | None = None,
    db_path: Path | str | None = None,
) -> None:
    with get_db(db_path) as db:
        db.execute(
            """
            INSERT INTO artifacts (run_id, path, sha256, rows)
            VALUES (?, ?, ?, ?)
            ON CONFLICT(run_id, path) DO UPDATE SET
                sha256 = excluded.sha256,
                rows   = excluded.rows
            """,
            (run_id, path, sha256, rows),
        )


def get_run_artifacts(run_id: int, db_path: Path | str | None = None) -> list[dict]:
    with get_db(db_path) as db:
        rows = db.execute(
            "SELECT * FROM artifacts WHERE run_id = ? ORDER BY path",
            (run_id,),
        ).fetchall()
        return [dict(r) for r in rows]
