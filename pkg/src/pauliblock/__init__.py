"""Pauli-blocked spontaneous emission of two fermions on one lattice site."""

__version__ = "0.1.0"
