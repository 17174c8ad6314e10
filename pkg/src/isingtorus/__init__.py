"""Exact finite-torus Ising energy observables and their continuum limits."""

from .geometry import SECTORS, TorusPeriods

__all__ = ["SECTORS", "TorusPeriods"]
__version__ = "0.1.0"
