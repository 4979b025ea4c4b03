"""Watercolor pigment mixture prediction and two-pigment recipe lookup."""

__version__ = "0.1.0"
