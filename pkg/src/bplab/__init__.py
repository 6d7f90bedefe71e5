"""Pseudo-spectral simulation and verification toolkit for the rotating 2D
vorticity equation with the anisotropic dispersive term."""

__version__ = "0.1.0"
