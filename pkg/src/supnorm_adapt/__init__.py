"""Adaptive sup-norm density estimation with spline projection kernels."""

__version__ = "0.1.0"
