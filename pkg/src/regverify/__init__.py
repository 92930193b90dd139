"""Numerical verification of Beilinson regulators on superelliptic curves."""

__version__ = "0.1.0"
