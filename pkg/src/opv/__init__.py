"""Quadratic operator perspectives, their bounds, and a checker for the
inequalities relating them."""

__version__ = "0.1.0"
