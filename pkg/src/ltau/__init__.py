"""Toolchain for a modal calculus of temporal resources."""

__version__ = "0.1.0"
