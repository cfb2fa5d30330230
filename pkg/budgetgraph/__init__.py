"""Simulator and strategy library for the budget-constrained random graph process."""

__version__ = "0.1.0"
