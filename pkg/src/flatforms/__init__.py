"""Flat manifolds, their holonomy-invariant quadratic forms, and rational classification."""

__version__ = "0.1.0"
