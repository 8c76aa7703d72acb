"""Exact finite-field experiments on focal loci of secant spans of pencils on canonical curves."""

__version__ = "0.1.0"
