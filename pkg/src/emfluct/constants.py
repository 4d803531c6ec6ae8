"""Physical constants (SI) used throughout the package."""

from scipy.constants import hbar as HBAR          # J s
from scipy.constants import c as C_LIGHT          # m / s
from scipy.constants import Boltzmann as KB       # J / K

__all__ = ["HBAR", "C_LIGHT", "KB", "thermal_wavelength"]


def thermal_wavelength(T):
    """Thermal wavelength hbar*c/(kB*T) in metres."""
    return HBAR * C_LIGHT / (KB * T)
