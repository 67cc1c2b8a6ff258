"""Figures and tables from game-experiment CSV/JSON artifacts.

This package only reads the published artifact contract; it does not import
the experiment code.
"""

from .figures import FigureSpec, KINDS, render
from .reader import SchemaError, load_runs

__version__ = "0.1.0"

__all__ = ["FigureSpec", "KINDS", "render", "SchemaError", "load_runs", "__version__"]
