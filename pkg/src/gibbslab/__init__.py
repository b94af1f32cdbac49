"""Numerical laboratory for system-bath thermalization bounds and phase-estimation Gibbs state preparation."""

__version__ = "0.1.0"
