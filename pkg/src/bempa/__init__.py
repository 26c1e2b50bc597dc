"""Particle-conserving variational circuits for Bose-Hubbard models."""

__version__ = "0.1.0"
