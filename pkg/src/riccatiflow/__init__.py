"""Foliated geodesic flows of Riccati equations over hyperbolic surfaces."""

__version__ = "0.1.0"
