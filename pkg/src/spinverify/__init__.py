"""Exact and numerical verification kernels for the GSp4 spin L-function integrals."""

__version__ = "0.1.0"
