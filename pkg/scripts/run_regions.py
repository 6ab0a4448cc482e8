#!/usr/bin/env python3
"""Compute rate and power region curves and write regions.csv.

Thin wrapper over the package CLI; all flags pass through.
"""

import sys

from nomalink.cli import main

if __name__ == "__main__":
    sys.exit(main(["regions", *sys.argv[1:]]))
