"""Spectral band repair version."""

__version__ = "0.1.0"
