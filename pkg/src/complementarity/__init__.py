"""Numerical lab for path/phase complementarity in a polarization-marked Young interferometer."""

__version__ = "0.1.0"
