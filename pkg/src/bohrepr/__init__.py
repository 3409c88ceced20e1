"""Verification toolkit for measurement contexts, definability and EPR-type correlations."""

__version__ = "0.1.0"
