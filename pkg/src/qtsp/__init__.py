"""Solvers for the quadratic travelling salesman problem with angle-based costs."""

__version__ = "0.1.0"
