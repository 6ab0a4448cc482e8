#!/usr/bin/env python3
"""Run the SNR-grid error sweep and write sweep.csv.

Thin wrapper over the package CLI; all flags pass through.
"""

import sys

from nomalink.cli import main

if __name__ == "__main__":
    sys.exit(main(["sweep", *sys.argv[1:]]))
