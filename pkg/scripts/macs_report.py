#!/usr/bin/env python3
"""Write the per-symbol and per-message arithmetic cost table.

Thin wrapper over the package CLI; all flags pass through.
"""

import sys

from nomalink.cli import main

if __name__ == "__main__":
    sys.exit(main(["macs", *sys.argv[1:]]))
