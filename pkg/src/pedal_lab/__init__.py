"""Equiaffine structure, centroaffine duals and projective pedals of surfaces."""

__version__ = "0.1.0"
