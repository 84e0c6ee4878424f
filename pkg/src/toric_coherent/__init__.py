"""Exact enumeration analysis of coherent X-rotation errors on the toric code."""

__version__ = "0.1.0"
