"""Harmonic quasiconformal maps: curves, holomorphic function spaces, harmonic extensions and numerical checks."""

__version__ = "0.1.0"
