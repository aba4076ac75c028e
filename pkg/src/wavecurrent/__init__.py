"""Spectral simulation of linear surface waves over currents and bathymetry."""

__version__ = "0.1.0"
