"""Exact polyhedral toolkit for bipartite correlation boxes and their effects."""

__version__ = "0.1.0"
