"""Entire functions that preserve entrywise nonnegativity of matrices."""

__version__ = "0.1.0"
