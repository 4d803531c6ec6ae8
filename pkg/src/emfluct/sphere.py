"""Isolated-sphere multipole sums: vacuum friction and thermal emission.

The friction of a sphere in equilibrium radiation at temperature T is a
sum over partial waves (l, m, P) of products of Mie T-matrix elements
with recoil coefficients a(l, m), b(l, m).  The azimuthal sums have the
closed forms

    sum_m a(l, m)^2 = (2l+1) / (3 l (l+1)),
    sum_m b(l, m)^2 = l (l+2) / (3 (l+1)),

which the tests cross-check against explicit m sums.  A perfect mirror
emits nothing yet feels a finite friction; for a small mirror the sum
approaches (896 pi^7/135) hbar R^6 / lambda_T^8, proportional to T^8.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, KB, C_LIGHT, thermal_wavelength
from .materials import alpha_dressed
from .mie import mie_t_batch
from .numerics import build_grid, bose_n, gk_weight

__all__ = [
    "ab_coefficients",
    "sum_a2",
    "sum_b2",
    "SphereFrictionResult",
    "sphere_friction",
    "sphere_emission",
    "dipole_friction",
    "mirror_friction_asymptote",
]


def ab_coefficients(l, m):
    """Recoil coefficients a(l, m) = m/(l(l+1)) and
    b(l, m) = sqrt(l(l+2)(l-m+1)(l+m+1)/((2l+1)(2l+3)))/(l+1)."""
    if l < 1 or int(l) != l:
        raise ValueError("l must be an integer >= 1")
    if abs(m) > l or int(m) != m:
        raise ValueError("m must be an integer with |m| <= l")
    a = m / (l * (l + 1.0))
    b = np.sqrt(l * (l + 2.0) * (l - m + 1.0) * (l + m + 1.0)
                / ((2.0 * l + 1.0) * (2.0 * l + 3.0))) / (l + 1.0)
    return a, b


def sum_a2(l):
    """Closed form of sum_m a(l, m)^2 over m = -l..l."""
    return (2.0 * l + 1.0) / (3.0 * l * (l + 1.0))


def sum_b2(l):
    """Closed form of sum_m b(l, m)^2 over m = -l..l."""
    return l * (l + 2.0) / (3.0 * (l + 1.0))


@dataclass(frozen=True)
class SphereFrictionResult:
    """Friction of an isolated sphere, gamma_ij = gamma * delta_ij."""
    gamma: float
    per_l: np.ndarray
    l_max_used: int
    tail_estimate: float
    converged: bool


def _multipole_sum(t_m, t_n, l_max):
    """The m-summed partial-wave combination entering the friction,
    per frequency.  t_m/t_n must extend to l_max + 1 rows so the
    l -> l+1 coupling of the last shell is included.  Returns per-shell
    contributions of shape (l_max, n_omega)."""
    ell = np.arange(1, l_max + 1)[:, None]
    lin = (2 * ell + 1) * (t_m[:l_max].real + t_n[:l_max].real)
    cross_pol = 3.0 * sum_a2(ell) * 2.0 * (t_m[:l_max] * t_n[:l_max].conj()).real
    cross_l = 6.0 * sum_b2(ell) * (
        (t_m[:l_max] * t_m[1:l_max + 1].conj()).real
        + (t_n[:l_max] * t_n[1:l_max + 1].conj()).real
    )
    return lin + cross_pol + cross_l


def sphere_friction(model, R, T, l_max=40, grid=None, rel_tol=1e-8):
    """Vacuum friction coefficient of an isolated sphere, in N s/m.

    Parameters
    ----------
    model : DielectricModel
    R : float, sphere radius (m)
    T : float, temperature (K)
    l_max : int, highest multipole shell retained

    Returns
    -------
    SphereFrictionResult

    Notes
    -----
    The per-shell tail ratio is monitored; ``converged`` is False when
    the last shell still carries more than 1e-6 of the total.
    """
    if R <= 0 or T <= 0:
        raise ValueError("R and T must be positive")
    if grid is None:
        grid = build_grid(T, rel_tol, x_max_hint=60.0)
    w = grid.nodes
    k = w / C_LIGHT
    t_m, t_n, _ = mie_t_batch(model, R, w, l_max + 1)
    shells = _multipole_sum(t_m, t_n, l_max)
    gk = gk_weight(w, T)
    pref = -2.0 * HBAR**2 / (3.0 * np.pi * KB * T)
    per_l = pref * np.array([grid.integrate(gk * k**2 * shells[i])
                             for i in range(l_max)])
    total = float(np.sum(per_l))
    pointwise = pref * np.sum(shells, axis=0)
    if np.any(pointwise < -1e-12 * max(abs(total), 1e-300) * np.max(gk)):
        warnings.warn("friction integrand negative after the m-sum; "
                      "check the T-matrix convention", stacklevel=2)
    tail = abs(per_l[-1]) / abs(total) if total != 0 else 0.0
    converged = tail < 1e-6
    if not converged:
        warnings.warn(f"multipole tail not converged: last shell ratio {tail:.2e}",
                      stacklevel=2)
    return SphereFrictionResult(gamma=total, per_l=per_l, l_max_used=l_max,
                                tail_estimate=float(tail), converged=converged)


def sphere_emission(model, R, T, l_max=40, grid=None, rel_tol=1e-8):
    """Thermal power emitted by an isolated sphere, in W.

    Proportional to the absorption combination -(Re T + |T|^2) summed
    over partial waves; zero for lossless spheres and perfect mirrors.
    """
    if R <= 0 or T <= 0:
        raise ValueError("R and T must be positive")
    if grid is None:
        grid = build_grid(T, rel_tol, x_max_hint=60.0)
    w = grid.nodes
    t_m, t_n, _ = mie_t_batch(model, R, w, l_max)
    ell = np.arange(1, l_max + 1)[:, None]
    absorb = -(t_m.real + np.abs(t_m) ** 2) - (t_n.real + np.abs(t_n) ** 2)
    spectrum = np.sum((2 * ell + 1) * absorb, axis=0)
    return float((2.0 * HBAR / np.pi) * grid.integrate(w * bose_n(w, T) * spectrum))


def dipole_friction(model, R, T, grid=None, rel_tol=1e-8):
    """Friction of a small sphere from its dressed polarizability alone.

    gamma = (4 hbar^2 / (3 pi kB T)) int dw gk(w) (w/c)^5 Im alpha_d(w).
    Independent of the multipole sum; agrees with its linear-in-T,
    l = 1 content for kR << 1.
    """
    if R <= 0 or T <= 0:
        raise ValueError("R and T must be positive")
    if grid is None:
        grid = build_grid(T, rel_tol, x_max_hint=60.0)
    w = grid.nodes
    k = w / C_LIGHT
    im_ad = alpha_dressed(model, R, w).imag
    gk = gk_weight(w, T)
    return float((4.0 * HBAR**2 / (3.0 * np.pi * KB * T))
                 * grid.integrate(gk * k**5 * im_ad))


def mirror_friction_asymptote(R, T):
    """Small-mirror limit (896 pi^7 / 135) hbar R^6 / lambda_T^8."""
    lam = thermal_wavelength(T)
    return (896.0 * np.pi**7 / 135.0) * HBAR * R**6 / lam**8
