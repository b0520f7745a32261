"""Finite-scale computational additive combinatorics toolkit."""

__version__ = "0.1.0"
