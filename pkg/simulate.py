#!/usr/bin/env python
"""
budgetgraph command-line entry point.

Runs experiments on the budget-constrained random graph process:
simulate, curves, oracle and coupling-test.
"""

import sys

from dotenv import load_dotenv

# Load environment defaults from .env file if it exists
load_dotenv()

from budgetgraph.cli import main

if __name__ == "__main__":
    sys.exit(main())
