#!/usr/bin/env python3
"""Train the modem pair and write model files plus the loss trace.

Thin wrapper over the package CLI; all flags pass through.
"""

import sys

from nomalink.cli import main

if __name__ == "__main__":
    sys.exit(main(["train-modem", *sys.argv[1:]]))
