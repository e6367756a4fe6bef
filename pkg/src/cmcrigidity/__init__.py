"""Numerical rigidity certificates for constant mean curvature surfaces."""

__version__ = "0.1.0"
