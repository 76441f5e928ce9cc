#!/usr/bin/env python3
"""
Bi-Kolmogorov lab entry point.

    python app.py verify --measure gaussian --dim 5
    python app.py kernel --t 1 --grid "-1:1:3" --methods subordination,spectral
"""
import logging
import sys

from lib.cli import main

logging.basicConfig(
    level=logging.INFO,
    format='%(levelname)s: %(message)s'
)

if __name__ == "__main__":
    sys.exit(main())
