"""Motif-aware molecular graph VAE with scaffold-constrained decoding."""

__version__ = "0.1.0"
