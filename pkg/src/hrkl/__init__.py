"""Interpretable kernel embeddings for heterogeneous sets of time series."""

__version__ = "0.1.0"
