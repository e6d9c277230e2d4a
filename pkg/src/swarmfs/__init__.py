"""Wrapper feature selection with an adaptive particle swarm."""

__version__ = "0.1.0"
