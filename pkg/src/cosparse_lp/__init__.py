"""Cosparse analysis recovery with lp relaxation: bound constants, solvers, checks."""

__version__ = "0.1.0"
