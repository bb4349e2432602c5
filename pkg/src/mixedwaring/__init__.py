"""Constructive descent for sums of two squares, two cubes and higher powers."""

__version__ = "0.1.0"
