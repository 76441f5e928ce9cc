#!/usr/bin/env python3
"""
Acceptance battery.
Runs every criterion through lib.cli.run and exits 1 if any of them fails.
"""
import json
import logging
from pathlib import Path
import sys

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.config import OUTPUT_DIR, run_config_from_dict
from lib.cli import run

logging.basicConfig(
    level=logging.INFO,
    format='%(levelname)s: %(message)s'
)
logger = logging.getLogger(__name__)

GAUSSIAN_1 = {"family": "gaussian", "dimension": 1, "params": {}}
GAUSSIAN_5 = {"family": "gaussian", "dimension": 5, "params": {}}

# (label, run config, expected exit, summary check)
CRITERIA = [
    ("explicit formula N=1", {"command": "evolve", "measure": GAUSSIAN_1}, 0, None),
    ("explicit formula N=2", {"command": "evolve", "measure": {**GAUSSIAN_1, "dimension": 2}}, 0, None),
    ("explicit formula N=3", {"command": "evolve", "measure": {**GAUSSIAN_1, "dimension": 3}}, 0, None),
    ("kernel cross-validation", {"command": "kernel", "measure": GAUSSIAN_1, "times": [0.5, 1, 2], "grid": "-1:1:3"}, 0, None),
    ("subordination identity", {"command": "kernel", "measure": GAUSSIAN_1, "times": [0.25, 1, 4], "grid": "0", "methods": ["spectral"]}, 0, None),
    ("rellich N=5", {"command": "verify", "measure": GAUSSIAN_5}, 0, None),
    ("rellich N=7", {"command": "verify", "measure": {**GAUSSIAN_5, "dimension": 7}}, 0, None),
    ("sharpness above threshold", {"command": "sharpness", "measure": GAUSSIAN_5, "c_factor": 1.05}, 0, None),
    ("sharpness below threshold", {"command": "sharpness", "measure": GAUSSIAN_5, "c_factor": 0.9}, 0, None),
    ("audit gaussian", {"command": "hypotheses", "measure": GAUSSIAN_5}, 0, "passed"),
    ("audit power", {"command": "hypotheses", "measure": {"family": "power", "dimension": 5, "params": {"m": 4}}}, 0, "passed"),
    ("audit squared_power", {"command": "hypotheses", "measure": {"family": "squared_power", "dimension": 5, "params": {"c1": 1, "c2": 1, "m": 1.5}}}, 0, "passed"),
    ("audit rational", {"command": "hypotheses", "measure": {"family": "rational", "dimension": 5, "params": {"alpha": 2, "beta": 8}}}, 0, "passed"),
    ("rational rejected", {"command": "hypotheses", "measure": {"family": "rational", "dimension": 5, "params": {"alpha": 2, "beta": 4}}}, 2, None),
    ("positivity", {"command": "positivity", "measure": GAUSSIAN_1}, 0, None),
    ("discrete gaussian", {"command": "spectrum", "measure": GAUSSIAN_1, "R": 8, "h": 0.01}, 0, None),
    ("discrete power", {"command": "spectrum", "measure": {"family": "power", "dimension": 1, "params": {"m": 4}}}, 0, None),
    ("discrete squared_power", {"command": "spectrum", "measure": {"family": "squared_power", "dimension": 1, "params": {"c1": 1, "c2": 1, "m": 1.5}}}, 0, None),
    ("discrete rational", {"command": "spectrum", "measure": {"family": "rational", "dimension": 1, "params": {"alpha": 2, "beta": 8}}, "R": 100, "h": 0.1, "tail_tolerance": 1e-4}, 0, None),
]


def run_battery(output_root: Path = OUTPUT_DIR / "acceptance"):
    """Run every criterion; exit 1 if any failed."""
    logger.info(f"Running {len(CRITERIA)} acceptance criteria")

    success_count = 0
    error_count = 0

    for i, (label, raw, expected, check) in enumerate(CRITERIA):
        try:
            config = run_config_from_dict({**raw, "output": str(output_root / f"{i:02d}")})
            code = run(config)
            if code != expected:
                raise AssertionError(f"exit {code}, expected {expected}")
            if check:
                summary = json.loads((Path(config.output) / config.command / "summary.json").read_text())
                if not summary["results"][check]:
                    raise AssertionError(f"summary flag {check!r} is false")
            logger.info(f"✓ {label}")
            success_count += 1

        except Exception as e:
            logger.error(f"✗ {label}: {e}", exc_info=True)
            error_count += 1

    logger.info(f"Acceptance complete: {success_count} passed, {error_count} failed")

    if error_count > 0:
        exit(1)

if __name__ == "__main__":
    run_battery()
