"""Numerics for Fourier-Jacobi coefficients of Siegel Poincare series."""

__version__ = "0.1.0"
