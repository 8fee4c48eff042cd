"""
Pseudo-spectral toolkit for 3D incompressible MHD in Elsasser variables:
Littlewood-Paley blocks, Besov and chi^s norms, a large-data family of
initial conditions, an integrating-factor solver, smallness-condition and
bootstrap monitors, and empirical checks of the supporting inequalities.
"""

__version__ = "0.1.0"
