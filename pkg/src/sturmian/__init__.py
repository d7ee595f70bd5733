"""Spectral theory of Sturmian Hamiltonians through periodic approximants."""

__version__ = "0.1.0"
