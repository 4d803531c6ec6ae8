"""Fluctuational electrodynamics for small scatterer clusters.

Evaluates radiative heat transfer, non-equilibrium Casimir force
response, and vacuum friction for spheres and point-scatterer clusters,
together with the equilibrium-fluctuation (Green-Kubo / Kirkwood /
Onsager) counterparts of each quantity by independent routes.
"""

__version__ = "0.1.0"

from . import constants, numerics, materials, mie, greens, sphere, dipoles, stochastic

__all__ = [
    "constants",
    "numerics",
    "materials",
    "mie",
    "greens",
    "sphere",
    "dipoles",
    "stochastic",
]
