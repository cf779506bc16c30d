"""Tropical differential forms, connections, bar complexes and descent data."""

__version__ = "0.1.0"
