"""Numerical laboratory for weighted differential entropy and the weighted EPI."""

__version__ = "0.1.0"
