"""
Artifact writers and the sweep pool.

JSON and CSV output is deterministic: sorted keys, fixed float formatting,
no timestamps. Identical inputs give byte-identical files.
"""

import csv
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def thread_count() -> int:
    """Worker cap from BIKO_THREADS, else min(8, cpu count)."""
    raw = os.environ.get("BIKO_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("Ignoring non-integer BIKO_THREADS=%r", raw)
    return min(8, os.cpu_count() or 1)


def ordered_map(func: Callable, items: Iterable) -> list:
    """Map func over items on a thread pool; results come back in input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


def _plain(value):
    """Convert numpy scalars/arrays and tuples into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def canonical_json(payload: dict) -> str:
    body = {"schema_version": SCHEMA_VERSION, **_plain(payload)}
    return json.dumps(body, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(payload), encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def _cell(value) -> str:
    value = _plain(value)
    if isinstance(value, float):
        return format(value, ".12g")
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: list[str], rows: Iterable) -> int:
    """Write rows (sequences or dicts keyed by header) and return the row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if isinstance(row, dict):
                row = [row.get(col) for col in header]
            writer.writerow([_cell(v) for v in row])
            count += 1
    logger.info("Wrote %s (%d rows)", path, count)
    return count


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
