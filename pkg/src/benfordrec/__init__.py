"""Benford behaviour of recurrence sequences: generation, exact and auxiliary-function
closed forms, and empirical digit diagnostics."""

__version__ = "0.1.0"
