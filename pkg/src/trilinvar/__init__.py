"""Fundamental invariants of 3x3x3 arrays under SL3 x SL3 x SL3, computed exactly."""

__version__ = "0.1.0"
