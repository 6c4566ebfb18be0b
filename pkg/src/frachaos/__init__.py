"""Fractional Hermite functions, fractional Wiener chaos and their checks."""

__version__ = "0.1.0"
