"""Switched one-dimensional bifurcation normal forms as piecewise deterministic Markov processes."""

__version__ = "0.1.0"
