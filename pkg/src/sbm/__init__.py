"""Numerics for killed subordinate Brownian motions."""

__version__ = "0.1.0"
