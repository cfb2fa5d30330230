from budgetgraph.cli.app import build_parser, main

__all__ = ["build_parser", "main"]
