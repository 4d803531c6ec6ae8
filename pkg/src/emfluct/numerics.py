"""Special functions, thermal occupation weights, and frequency quadrature.

All physics modules integrate spectra of the form f(omega) * (Bose-type
weight) over omega in (0, inf).  The weights decay at least exponentially
in x = hbar*omega/(kB*T), so the integrals are done on adaptive
Gauss-Legendre panels in x and truncated where the Green-Kubo weight
x^2 e^x/(e^x-1)^2 has fallen below a user tolerance.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .constants import HBAR, KB

__all__ = [
    "spherical_bessel",
    "sph_jh_all",
    "bose_n",
    "bose_dn_dT",
    "gk_weight",
    "SpectralGrid",
    "build_grid",
]

L_MAX_SUPPORTED = 80

_RESCALE_THRESHOLD = 1e250


def _j0_j1(z):
    # closed forms, with series branches where the closed forms cancel
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    small = np.abs(z) < 0.5
    if np.any(small):
        zs = np.where(small, z, 1.0)
        z2 = zs * zs
        j0s = 1 - z2 / 6 * (1 - z2 / 20 * (1 - z2 / 42 * (1 - z2 / 72 * (1 - z2 / 110))))
        j1s = zs / 3 * (1 - z2 / 10 * (1 - z2 / 28 * (1 - z2 / 54 * (1 - z2 / 88))))
        j0 = np.where(small, j0s, j0)
        j1 = np.where(small, j1s, j1)
    return j0, j1


def _j_downward(lmax, z):
    """Normalised downward recurrence for j_l, rows 0..lmax; z raveled."""
    nz = z.size
    j0, j1 = _j0_j1(z)
    l_start = lmax + 16 + int(np.ceil(1.2 * np.max(np.abs(z))))
    j = np.zeros((lmax + 1, nz), dtype=complex)
    f_up = np.zeros(nz, dtype=complex)            # f_{l+1}
    f = np.full(nz, 1e-30, dtype=complex)         # f_l (arbitrary seed)
    for l in range(l_start, -1, -1):
        if l <= lmax:
            j[l] = f
        f_down = (2 * l + 1) / z * f - f_up
        f_up, f = f, f_down
        big = np.abs(f) > _RESCALE_THRESHOLD
        if np.any(big):
            scale = np.where(big, 1.0 / _RESCALE_THRESHOLD, 1.0)
            f *= scale
            f_up *= scale
            j[:, big] *= scale[big]
    # f_up now holds the unnormalised f_0.  Normalise against whichever
    # closed form is better conditioned (j_0 has zeros on the real axis).
    f0 = f_up
    use0 = np.abs(j0) >= 0.1 * np.abs(j1)
    norm = np.where(use0 & (f0 != 0), j0 / np.where(f0 != 0, f0, 1.0), 0.0)
    if lmax >= 1:
        f1 = j[1]
        alt = np.where(f1 != 0, j1 / np.where(f1 != 0, f1, 1.0), 0.0)
        norm = np.where(use0 & (f0 != 0), norm, alt)
    j *= norm
    j[0] = j0
    if lmax >= 1:
        j[1] = j1
    return j


def _h_series(lmax, z, kind=1):
    """Exact terminating series of the spherical Hankel functions,
    h_l^(1,2) = (-+i)^(l+1) e^{+-iz}/z sum_m [(l+m)!/(m!(l-m)!)] (+-i/2z)^m,
    rows 0..lmax; accurate where the chosen kind is not the dominant
    solution."""
    sign = 1.0 if kind == 1 else -1.0
    pref = np.exp(sign * 1j * z) / z
    iw = sign * 1j / (2.0 * z)
    h = np.zeros((lmax + 1, z.size), dtype=complex)
    with np.errstate(invalid="ignore", over="ignore"):
        for l in range(lmax + 1):
            acc = np.ones(z.size, dtype=complex)
            c = 1.0
            p = np.ones(z.size, dtype=complex)
            for m in range(1, l + 1):
                c *= (l + m) * (l - m + 1) / m
                p = p * iw
                acc = acc + c * p
            h[l] = (-sign * 1j) ** (l + 1) * pref * acc
    return h


def sph_jh_all(lmax, z):
    """Spherical Bessel j_l, outgoing Hankel h_l, and derivatives,
    l = 0..lmax.

    Parameters
    ----------
    lmax : int
        Highest order, 0 <= lmax <= 80.
    z : array_like, complex
        Arguments; must be nonzero and finite.

    Returns
    -------
    j, h, jp, hp : ndarray, shape (lmax+1,) + z.shape
        Values and first derivatives.  h_l overflows to inf for orders
        far above |z|; callers must guard (the physical multipole sums
        converge long before that).

    Notes
    -----
    j_l: downward recurrence with on-the-fly rescaling, normalised
    against closed forms of j_0/j_1.  h_l: near the real axis via
    upward recurrence for the dominant y_l; in the upper half plane via
    its exact terminating series (there h is minimal and j + i y loses
    all digits); in the lower half plane via h = 2 j - h^(2) with the
    second-kind series, which is minimal there.
    """
    if lmax < 0 or lmax > L_MAX_SUPPORTED:
        raise ValueError(f"lmax must be in [0, {L_MAX_SUPPORTED}], got {lmax}")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(z)) or np.any(z == 0):
        raise ValueError("arguments must be finite and nonzero")
    shape = z.shape
    z = z.ravel()
    nz = z.size
    lh = max(lmax, 1)

    j_ext = _j_downward(lh, z)
    j = j_ext[:lmax + 1]

    h = np.zeros((lh + 1, nz), dtype=complex)
    near = np.abs(z.imag) <= 4.0
    upper = z.imag > 4.0
    lower = z.imag < -4.0
    with np.errstate(invalid="ignore", over="ignore"):
        if np.any(near):
            zn = z[near]
            y = np.zeros((lh + 1, zn.size), dtype=complex)
            y[0] = -np.cos(zn) / zn
            y[1] = -np.cos(zn) / zn**2 - np.sin(zn) / zn
            for l in range(2, lh + 1):
                y[l] = (2 * l - 1) / zn * y[l - 1] - y[l - 2]
            h[:, near] = j_ext[:, near] + 1j * y
        if np.any(upper):
            h[:, upper] = _h_series(lh, z[upper], kind=1)
        if np.any(lower):
            h[:, lower] = (2.0 * j_ext[:, lower]
                           - _h_series(lh, z[lower], kind=2))

    jp = np.zeros_like(j)
    hp = np.zeros((lmax + 1, nz), dtype=complex)
    with np.errstate(invalid="ignore", over="ignore"):
        if lmax >= 1:
            ell = np.arange(1, lmax + 1)[:, None]
            jp[1:] = j[:-1] - (ell + 1) / z * j[1:]
            hp[1:] = h[:lmax] - (ell + 1) / z * h[1:lmax + 1]
        jp[0] = -j_ext[1]
        hp[0] = -h[1]

    out_shape = (lmax + 1,) + shape
    return (j.reshape(out_shape), h[:lmax + 1].reshape(out_shape),
            jp.reshape(out_shape), hp.reshape(out_shape))


def spherical_bessel(l, z):
    """Spherical Bessel j_l, outgoing Hankel h_l = j_l + i y_l, and derivatives.

    Parameters
    ----------
    l : int
        Order, 0 <= l <= 80.
    z : complex
        Argument, finite and nonzero.

    Returns
    -------
    (j, h, jp, hp) : complex scalars
    """
    if int(l) != l or l < 0:
        raise ValueError("l must be a non-negative integer")
    j, h, jp, hp = sph_jh_all(int(l), z)
    return (complex(j[-1].ravel()[0]), complex(h[-1].ravel()[0]),
            complex(jp[-1].ravel()[0]), complex(hp[-1].ravel()[0]))


# ----------------------------------------------------------------------
# Bose occupation weights
# ----------------------------------------------------------------------

def _x_of(omega, T):
    return HBAR * np.asarray(omega, dtype=float) / (KB * T)


def bose_n(omega, T):
    """Bose occupation 1/(e^x - 1), x = hbar*omega/(kB*T)."""
    return 1.0 / np.expm1(_x_of(omega, T))


def bose_dn_dT(omega, T):
    """Temperature derivative of the Bose occupation, in 1/K.

    Evaluated as (x/T) e^{-x}/(1-e^{-x})^2, which is overflow-safe for
    any x > 0 and independent of the floating path used by gk_weight.
    """
    x = _x_of(omega, T)
    em = np.exp(-x)
    return (x / T) * em / np.expm1(-x) ** 2


def gk_weight(omega, T):
    """Green-Kubo spectral weight e^x/(e^x-1)^2 = n(n+1).

    Computed as 1/(4 sinh^2(x/2)) for moderate x and as e^{-x} beyond,
    where the two agree to machine precision.
    """
    x = _x_of(omega, T)
    x_safe = np.where(x < 600.0, x, 600.0)
    w = 1.0 / (4.0 * np.sinh(x_safe / 2.0) ** 2)
    return np.where(x < 600.0, w, np.exp(-np.where(x >= 600.0, x, 600.0)))


# ----------------------------------------------------------------------
# Frequency quadrature
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralGrid:
    """Frequency mesh with quadrature weights for thermal integrals.

    Attributes
    ----------
    nodes : ndarray
        Angular frequencies, rad/s, strictly increasing, all positive.
    weights : ndarray
        Quadrature weights in rad/s (positive).
    temperature_scale : float
        Reference temperature used for the substitution x = hbar w/(kB T).
    diagnostics : dict
        x-range, panel/node counts, and the self-test residual.
    """
    nodes: np.ndarray
    weights: np.ndarray
    temperature_scale: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def x(self):
        """Dimensionless nodes x = hbar*omega/(kB*T)."""
        return HBAR * self.nodes / (KB * self.temperature_scale)

    def integrate(self, values):
        """Sum values * weights along the last axis (fixed order)."""
        return np.asarray(values) @ self.weights


def _gk_cutoff(rel_tol):
    # Smallest x with x^2 e^x/(e^x-1)^2 < rel_tol (the weight's max is 1
    # at x -> 0).  Solved by fixed-point iteration on x = ln(x^2/tol).
    x = 30.0
    for _ in range(40):
        x = np.log(x * x / rel_tol)
    return float(x)


def _zeta_cutoff(target):
    # Smallest x_hi whose truncation tail of int x^3/(e^x-1) stays a
    # factor of five below the self-test target.
    goal = 0.2 * target * np.pi**4 / 15.0
    x = 40.0
    for _ in range(40):
        x = np.log(x**3 / goal)
    return float(x)


def _panel_edges(x_hi):
    edges = [0.0, 0.25]
    while edges[-1] < x_hi:
        edges.append(min(2.0 * edges[-1], x_hi))
    return np.asarray(edges)


def build_grid(T, rel_tol=1e-8, x_max_hint=40.0):
    """Build an adaptive Gauss-Legendre grid for thermal integrals.

    Parameters
    ----------
    T : float
        Temperature in K, > 0.
    rel_tol : float
        Truncation tolerance, 0 < rel_tol < 1e-2.  The x-domain is cut
        where x^2 e^x/(e^x-1)^2 drops below rel_tol of its maximum.
    x_max_hint : float
        Lower bound on the upper x limit (integrands with high powers
        of x need a longer tail than the weight criterion alone gives).

    Returns
    -------
    SpectralGrid

    Raises
    ------
    ValueError
        For T <= 0 or rel_tol out of range, or if the self-test fails
        to converge.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if not (0.0 < rel_tol < 1e-2):
        raise ValueError("rel_tol must be in (0, 1e-2)")

    target = max(rel_tol**2, 5e-14)
    x_hi = max(_gk_cutoff(rel_tol), float(x_max_hint), _zeta_cutoff(target))
    edges = _panel_edges(x_hi)
    exact = np.pi**4 / 15.0

    for n_per_panel in (16, 24, 32, 48, 64):
        xg, wg = leggauss(n_per_panel)
        xs, ws = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            xs.append(0.5 * (a + b) + half * xg)
            ws.append(half * wg)
        x = np.concatenate(xs)
        w = np.concatenate(ws)
        check = float(np.sum(w * x**3 / np.expm1(x)))
        resid = abs(check - exact) / exact
        if resid < target:
            scale = KB * T / HBAR
            return SpectralGrid(
                nodes=x * scale,
                weights=w * scale,
                temperature_scale=float(T),
                diagnostics={
                    "x_hi": x_hi,
                    "n_panels": len(edges) - 1,
                    "n_nodes": x.size,
                    "selftest_rel_err": resid,
                },
            )
    raise ValueError(
        f"quadrature self-test did not reach {target:g} (last residual {resid:g})"
    )
