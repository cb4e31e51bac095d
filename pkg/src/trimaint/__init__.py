"""Incremental maintenance of triangle queries under single-tuple updates."""

__version__ = "0.1.0"
