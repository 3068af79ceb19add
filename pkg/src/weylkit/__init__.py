"""Analytical two-qubit compiler built on Cartan coordinates."""
__version__ = "0.1.0"
