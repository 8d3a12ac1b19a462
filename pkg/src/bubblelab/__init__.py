"""Numerics for alpha-harmonic maps from the flat square torus to the round 2-sphere."""

__version__ = "0.1.0"
