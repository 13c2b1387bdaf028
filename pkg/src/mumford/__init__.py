"""Computational toolkit for Mumford groups in positive characteristic."""

__version__ = "0.1.0"
