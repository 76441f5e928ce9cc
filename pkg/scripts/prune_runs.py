#!/usr/bin/env python3
"""
Ledger cleanup: delete runs (and their artifact rows) started before a cutoff.
Usage: prune_runs.py YYYY-MM-DD
"""
import logging
from pathlib import Path
import sys

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.database import delete_runs_before

logging.basicConfig(
    level=logging.INFO,
    format='%(levelname)s: %(message)s'
)
logger = logging.getLogger(__name__)

def prune_runs(cutoff: str) -> int:
    """Delete ledger rows for runs started before cutoff."""
    deleted = delete_runs_before(cutoff)
    logger.info(f"Deleted {deleted} runs started before {cutoff}")
    return deleted

if __name__ == "__main__":
    if len(sys.argv) != 2:
        logger.error("Usage: prune_runs.py YYYY-MM-DD")
        exit(2)
    count = prune_runs(sys.argv[1])
    logger.info(f"Cleanup complete: {count} runs removed")
