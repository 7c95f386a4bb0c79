"""Functional models for row contractions on finite-dimensional spaces."""

__version__ = "0.1.0"
