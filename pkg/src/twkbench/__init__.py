"""Exact computations around deformation rings, Selmer complexes,
Weil-Deligne representations, Hecke operators and patching."""

__version__ = "0.1.0"
