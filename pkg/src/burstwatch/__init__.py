"""Streaming detection and early prediction of bursting hashtags."""

__version__ = "0.1.0"
