#!/usr/bin/env python3
"""
Neuron-per-mote optimization experiments.

Usage:
    python wpn_ann.py solve --config sample/config.yml --out out
    python wpn_ann.py costs --n 100000 --channels 10
    python wpn_ann.py verify --max-vertices 6
"""

import sys

from wpn.harness_cli import main


if __name__ == "__main__":
    sys.exit(main())
