"""Structural-feature numeral recognition with a Euclidean k-NN classifier."""

__version__ = "0.1.0"
