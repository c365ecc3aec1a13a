"""Mutation testing across recorded revision histories."""

__version__ = "0.1.0"
