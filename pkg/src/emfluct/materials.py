"""Dielectric response models and point-scatterer polarizabilities.

Models are immutable after construction.  Passivity (Im eps >= 0 for
omega > 0) is checked on a dense audit grid at load time; Kramers-Kronig
is deliberately not asserted because tabulated data may be windowed.
"""

import csv

import numpy as np

__all__ = [
    "DielectricModel",
    "Drude",
    "Lorentz",
    "Constant",
    "Tabulated",
    "PerfectMirror",
    "load_tabulated",
    "alpha0",
    "alpha_dressed",
]

from .constants import C_LIGHT

_AUDIT_POINTS = 512


class DielectricModel:
    """Base class: a dielectric function eps(omega) for omega > 0."""

    is_mirror = False

    def epsilon(self, omega):
        raise NotImplementedError

    def _audit_passivity(self, omega_lo, omega_hi):
        w = np.geomspace(omega_lo, omega_hi, _AUDIT_POINTS)
        eps = self.epsilon(w)
        if np.any(np.imag(eps) < -1e-15 * np.abs(eps)):
            raise ValueError(f"{self!r} violates passivity (Im eps < 0)")


class Drude(DielectricModel):
    """eps = 1 - wp^2/(w^2 + i*gamma*w)."""

    def __init__(self, omega_p, gamma):
        if omega_p <= 0 or gamma < 0:
            raise ValueError("Drude requires omega_p > 0 and gamma >= 0")
        self.omega_p = float(omega_p)
        self.gamma = float(gamma)
        self._audit_passivity(1e-6 * omega_p, 1e6 * omega_p)

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        _check_positive(w)
        return 1.0 - self.omega_p**2 / (w**2 + 1j * self.gamma * w)

    def __repr__(self):
        return f"Drude(omega_p={self.omega_p:g}, gamma={self.gamma:g})"


class Lorentz(DielectricModel):
    """eps = eps_inf + wp^2/(w0^2 - w^2 - i*gamma*w)."""

    def __init__(self, eps_inf, omega_0, omega_p, gamma):
        if omega_0 <= 0 or omega_p <= 0 or gamma < 0 or eps_inf < 1:
            raise ValueError("invalid Lorentz parameters")
        self.eps_inf = float(eps_inf)
        self.omega_0 = float(omega_0)
        self.omega_p = float(omega_p)
        self.gamma = float(gamma)
        self._audit_passivity(1e-4 * omega_0, 1e4 * omega_0)

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        _check_positive(w)
        return self.eps_inf + self.omega_p**2 / (
            self.omega_0**2 - w**2 - 1j * self.gamma * w
        )

    def __repr__(self):
        return (f"Lorentz(eps_inf={self.eps_inf:g}, omega_0={self.omega_0:g}, "
                f"omega_p={self.omega_p:g}, gamma={self.gamma:g})")


class Constant(DielectricModel):
    """Frequency-independent eps (Im eps >= 0 required)."""

    def __init__(self, eps):
        eps = complex(eps)
        if eps.imag < 0:
            raise ValueError("constant model violates passivity (Im eps < 0)")
        self.eps = eps

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        _check_positive(w)
        return np.full_like(w, self.eps, dtype=complex)

    def __repr__(self):
        return f"Constant(eps={self.eps})"


class Tabulated(DielectricModel):
    """Piecewise-linear interpolation of (omega, eps) samples.

    Queries outside the tabulated range are an error, not an
    extrapolation.
    """

    def __init__(self, omega, eps):
        omega = np.asarray(omega, dtype=float)
        eps = np.asarray(eps, dtype=complex)
        if omega.ndim != 1 or omega.size < 2 or omega.shape != eps.shape:
            raise ValueError("need matching 1-d arrays with >= 2 samples")
        if np.any(omega <= 0) or np.any(np.diff(omega) <= 0):
            raise ValueError("omega samples must be positive and strictly increasing")
        if np.any(eps.imag < 0):
            raise ValueError("tabulated data violates passivity (Im eps < 0)")
        self.omega = omega
        self.eps = eps

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        _check_positive(w)
        if np.any(w < self.omega[0]) or np.any(w > self.omega[-1]):
            raise ValueError("query outside tabulated range")
        re = np.interp(w, self.omega, self.eps.real)
        im = np.interp(w, self.omega, self.eps.imag)
        return re + 1j * im

    def __repr__(self):
        return f"Tabulated({self.omega.size} samples)"


class PerfectMirror(DielectricModel):
    """Perfectly reflecting sphere/plate material.

    Has no finite eps; callers must branch on ``is_mirror`` and use the
    boundary-condition scattering formulas instead.
    """

    is_mirror = True

    def epsilon(self, omega):
        raise TypeError("perfect mirror has no finite dielectric function")

    def __repr__(self):
        return "PerfectMirror()"


def _check_positive(w):
    if np.any(np.asarray(w) <= 0) or not np.all(np.isfinite(w)):
        raise ValueError("omega must be positive and finite")


def load_tabulated(path):
    """Load a tabulated dielectric model from CSV.

    The file must carry the header ``omega_rad_s,eps_re,eps_im``;
    ``#`` comment lines are permitted.  Rows must be sorted in omega.
    """
    omega, re, im = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(row for row in fh if not row.lstrip().startswith("#"))
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["omega_rad_s", "eps_re", "eps_im"]:
            raise ValueError("expected header 'omega_rad_s,eps_re,eps_im'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValueError(f"malformed row {lineno}: {row!r}")
            try:
                omega.append(float(row[0]))
                re.append(float(row[1]))
                im.append(float(row[2]))
            except ValueError as exc:
                raise ValueError(f"malformed row {lineno}: {row!r}") from exc
    return Tabulated(np.asarray(omega), np.asarray(re) + 1j * np.asarray(im))


# ----------------------------------------------------------------------
# Point-scatterer polarizabilities
# ----------------------------------------------------------------------

def alpha0(model, R, omega):
    """Bare Clausius-Mossotti polarizability R^3 (eps-1)/(eps+2) in m^3.

    A perfect mirror takes the eps -> inf limit, alpha0 = R^3.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    w = np.asarray(omega, dtype=float)
    if model.is_mirror:
        return np.full_like(w, R**3, dtype=complex)
    eps = model.epsilon(w)
    return R**3 * (eps - 1.0) / (eps + 2.0)


def alpha_dressed(model, R, omega):
    """Radiation-corrected polarizability alpha0/(1 - i (2/3) k^3 alpha0).

    The correction resums the imaginary self-coupling k^3/(6 pi) of the
    free Green's function, so a dressed scatterer satisfies the optical
    theorem: Im alpha_d - (2/3) k^3 |alpha_d|^2 = Im alpha0 / |D|^2 >= 0
    with equality iff Im eps = 0.
    """
    a0 = alpha0(model, R, omega)
    k = np.asarray(omega, dtype=float) / C_LIGHT
    return a0 / (1.0 - 1j * (2.0 / 3.0) * k**3 * a0)
