"""Certified ground-state lower bounds via sum-of-squares variational embedding."""

__version__ = "0.1.0"
