"""Simulation toolkit for BB84-based verification, restricted quantum randomized
encodings, classical-encoding cloner bounds and blind-computing attacks."""

from .kernels import BACKEND

__version__ = "0.1.0"
