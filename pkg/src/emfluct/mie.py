"""Mie T-matrix elements for homogeneous spheres and perfect mirrors.

Convention: the scattered wave is T times an incoming unit-amplitude
spherical wave, with T = -(a_l, b_l) in terms of the textbook Mie
coefficients.  A lossless sphere then satisfies |1 + 2T| = 1, which is
the machine-checkable anchor for the sign convention; for lossy spheres
the absorption combination -(Re T + |T|^2) is non-negative.  Elements
are independent of the azimuthal index m.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT
from .materials import alpha0
from .numerics import sph_jh_all

__all__ = ["MieTMatrix", "mie_t", "mie_t_batch", "dipole_limit_t"]


@dataclass(frozen=True)
class MieTMatrix:
    """T-matrix elements of a sphere at one frequency.

    Attributes
    ----------
    R : float
        Sphere radius (m).
    omega : float
        Angular frequency (rad/s).
    l_max : int
        Highest multipole order.
    t_m, t_n : ndarray, shape (l_max,)
        Elements for P = M (magnetic) and P = N (electric),
        index 0 holding l = 1.
    truncated : bool
        True when high-l elements were zeroed because the Hankel
        recurrence overflowed (physically negligible orders).
    """
    R: float
    omega: float
    l_max: int
    t_m: np.ndarray
    t_n: np.ndarray
    truncated: bool = False

    def entry(self, P, l):
        if not 1 <= l <= self.l_max:
            raise ValueError(f"l must be in [1, {self.l_max}]")
        if P == "M":
            return self.t_m[l - 1]
        if P == "N":
            return self.t_n[l - 1]
        raise ValueError("P must be 'M' or 'N'")


def mie_t_batch(model, R, omega, l_max):
    """T-matrix elements for an array of frequencies.

    Returns
    -------
    t_m, t_n : ndarray, shape (l_max, len(omega))
    truncated : bool
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    if R <= 0 or np.any(omega <= 0):
        raise ValueError("R and omega must be positive")
    x = omega * R / C_LIGHT
    if l_max > np.max(x) + 40:
        warnings.warn(
            f"l_max={l_max} far above size parameter max(x)={np.max(x):.3g}; "
            "high orders are evaluated but may be flushed to zero",
            stacklevel=2,
        )

    jx, hx, jpx, hpx = sph_jh_all(l_max, x)
    # Riccati-Bessel: psi = x j, xi = x h, and their derivatives.
    psi = x * jx
    psip = jx + x * jpx
    xi = x * hx
    xip = hx + x * hpx

    if model.is_mirror:
        t_m = -jx / hx
        t_n = -psip / xip
    else:
        eps = model.epsilon(omega)
        n = np.sqrt(eps.astype(complex))
        nx = n * x
        jn_, _, jpn_, _ = sph_jh_all(l_max, nx)
        psin = nx * jn_
        psinp = jn_ + nx * jpn_
        a_num = n * psin * psip - psi * psinp
        a_den = n * psin * xip - xi * psinp
        b_num = psin * psip - n * psi * psinp
        b_den = psin * xip - n * xi * psinp
        t_n = -a_num / a_den
        t_m = -b_num / b_den

    t_m = t_m[1:]
    t_n = t_n[1:]
    bad = ~np.isfinite(t_m) | ~np.isfinite(t_n)
    truncated = bool(np.any(bad))
    if truncated:
        t_m = np.where(np.isfinite(t_m), t_m, 0.0)
        t_n = np.where(np.isfinite(t_n), t_n, 0.0)
    return t_m, t_n, truncated


def mie_t(model, R, omega, l_max):
    """Mie T-matrix of a homogeneous sphere (or perfect mirror).

    Parameters
    ----------
    model : DielectricModel
    R : float
        Radius in m, > 0.
    omega : float
        Angular frequency in rad/s, > 0.
    l_max : int
        Highest multipole order, >= 1.

    Returns
    -------
    MieTMatrix
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    t_m, t_n, truncated = mie_t_batch(model, R, np.asarray([omega], float), l_max)
    return MieTMatrix(R=float(R), omega=float(omega), l_max=int(l_max),
                      t_m=t_m[:, 0], t_n=t_n[:, 0], truncated=truncated)


def dipole_limit_t(model, R, omega):
    """Leading small-R electric-dipole element (2i/3)(w/c)^3 alpha0.

    This is the l = 1, P = N element to lowest order in R; a perfect
    mirror takes alpha0 = R^3.
    """
    omega = np.asarray(omega, dtype=float)
    if R <= 0 or np.any(omega <= 0):
        raise ValueError("R and omega must be positive")
    k = omega / C_LIGHT
    return (2j / 3.0) * k**3 * alpha0(model, R, omega)
