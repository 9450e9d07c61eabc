"""Regression on multilayer network centralities."""

__version__ = "0.1.0"
