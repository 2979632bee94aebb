"""Cavity-QED simulation of non-adiabatic holonomic gates in decoherence-free subspaces."""

__version__ = "0.1.0"
