#!/usr/bin/env python
"""Derive, sweep, integrate and verify Liouvillian-form integrators."""

import sys

from src.scripts.liouform import main

if __name__ == "__main__":
    sys.exit(main())
