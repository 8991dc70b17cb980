"""Verifier-in-the-loop router configuration synthesis."""

__version__ = "0.1.0"
