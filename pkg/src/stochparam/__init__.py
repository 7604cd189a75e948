"""Kolmogorov's stochasticity parameter for number-theoretic sequences."""

__version__ = "0.1.0"
