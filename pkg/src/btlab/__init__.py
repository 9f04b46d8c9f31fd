"""Numerical laboratory for Berezin-Toeplitz quantization of the projective line."""

__version__ = "0.1.0"
