#!/usr/bin/env python3
"""
iprelax - compatibility entry point.
Delegates to the command line in src.cli. Re-exports for demo.py and library use.

Usage:
  python iprelax.py solve TP1
  python iprelax.py solve models/tp2.mod --format json
  python iprelax.py solve --all
"""
import sys

from src.cli import main
from src.settings import Config, SolverConfig
from src.db import Database
from src.catalog import CATALOG, lookup_problem
from src.model_text import load_model, parse_model, compile_model
from src.solver import outer_solve, solve
from src.report import render

__all__ = [
    "main",
    "Config",
    "SolverConfig",
    "Database",
    "CATALOG",
    "lookup_problem",
    "load_model",
    "parse_model",
    "compile_model",
    "outer_solve",
    "solve",
    "render",
]

if __name__ == "__main__":
    sys.exit(main())
