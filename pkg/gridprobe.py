#!/usr/bin/env python3
"""Main entry point for gridprobe."""

import sys
from gridprobe.cli.application import main

if __name__ == '__main__':
    sys.exit(main())
