"""Dyadic Green's functions of the vector Helmholtz equation.

Normalization: (curl curl - k^2) G = 1 delta(r - r'), k = w/c, so the
free dyadic is G0 = (1 + grad grad / k^2) e^{ikr}/(4 pi r) and the
coincidence limit of its imaginary part is Im G0(r, r) = k/(6 pi) * 1.
All derivatives act on the first spatial argument.

The half-space (plate) reflected part is a Sommerfeld integral over the
transverse wavevector with Fresnel r_s/r_p coefficients, split at
k_par = k into propagating and evanescent regions.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import j0 as _J0, j1 as _J1, jv as _Jv

from .constants import C_LIGHT

__all__ = [
    "GreensBlock",
    "g0_free",
    "im_g0_coincidence",
    "free_tensors",
    "self_tensors",
    "fresnel_rs_rp",
    "g0_plate",
]

_PLATE_TOL = 1e-8

_EYE = np.eye(3)


@dataclass(frozen=True)
class GreensBlock:
    """A 3x3 dyadic Green's function block with its spatial gradient.

    grad[i] is the derivative along Cartesian direction i of the first
    argument.  ``which`` is 'free' or 'plate_reflected'.
    """
    value: np.ndarray
    grad: np.ndarray
    which: str
    diagnostics: dict = field(default_factory=dict)


def _falling(n, m):
    v = 1
    for i in range(n, n - m, -1):
        v *= i
    return v


def _phi_radial_derivs(r, k, n_max):
    """Radial derivatives of phi = e^{ikr}/(4 pi r), orders 0..n_max.

    phi^(n) = phi * sum_m (-1)^m [n!/(n-m)!] s^{n-m} u^m with s = ik,
    u = 1/r.  Shape: (n_max+1,) + broadcast(r, k).shape.
    """
    r = np.asarray(r, dtype=float)
    s = 1j * np.asarray(k, dtype=float)
    u = 1.0 / r
    phi = np.exp(s * r) * u / (4.0 * np.pi)
    shape = np.broadcast(r, s).shape
    out = [phi * np.ones(shape)]
    for n in range(1, n_max + 1):
        acc = np.zeros(shape, dtype=complex)
        for m in range(0, n + 1):
            acc = acc + (-1) ** m * _falling(n, m) * s ** (n - m) * u**m
        out.append(phi * acc)
    return np.stack(out)


def free_tensors(dvec, k, order=2):
    """Free dyadic G0 and its derivative tensors for displacements.

    Parameters
    ----------
    dvec : ndarray (..., 3)
        Displacements r - r', all nonzero.
    k : float or ndarray
        Wavenumbers.  A 1-d k is prepended as a new leading axis.
    order : int
        0 -> (G,); 1 -> (G, D); 2 -> (G, D, H).

    Returns
    -------
    G : (..., 3, 3)
    D : (..., 3, 3, 3), D[..., i, a, b] = d_i G_ab
    H : (..., 3, 3, 3, 3), H[..., i, j, a, b] = d_i d_j G_ab
    """
    dvec = np.asarray(dvec, dtype=float)
    r = np.linalg.norm(dvec, axis=-1)
    if np.any(r == 0):
        raise ValueError("free_tensors requires nonzero separations")
    k = np.asarray(k, dtype=float)
    if k.ndim == 1:
        kb = k.reshape(k.shape + (1,) * r.ndim)
    else:
        kb = k
    f = _phi_radial_derivs(r, kb, 2 + order)
    shape = f[0].shape
    ones = np.ones(shape)
    k2 = (kb * ones) ** 2
    u = (1.0 / r) * ones
    n = np.broadcast_to(dvec / r[..., None], shape + (3,))
    nn = n[..., :, None] * n[..., None, :]

    c2_nn = f[2] - f[1] * u
    c2_d = f[1] * u
    rank2 = c2_nn[..., None, None] * nn + c2_d[..., None, None] * _EYE
    G = f[0][..., None, None] * _EYE + rank2 / k2[..., None, None]
    if order == 0:
        return (G,)

    c3_nnn = f[3] - 3 * f[2] * u + 3 * f[1] * u**2
    c3_dn = f[2] * u - f[1] * u**2
    nnn = n[..., :, None, None] * nn[..., None, :, :]
    sym3 = np.zeros(shape + (3, 3, 3), dtype=complex)
    for i in range(3):
        for a in range(3):
            for b in range(3):
                sym3[..., i, a, b] = ((a == b) * n[..., i]
                                      + (i == a) * n[..., b]
                                      + (i == b) * n[..., a])
    rank3 = c3_nnn[..., None, None, None] * nnn + c3_dn[..., None, None, None] * sym3
    D = (f[1][..., None, None, None] * (n[..., :, None, None] * _EYE)
         + rank3 / k2[..., None, None, None])
    if order == 1:
        return G, D

    c4_n4 = f[4] - 6 * f[3] * u + 15 * f[2] * u**2 - 15 * f[1] * u**3
    c4_dn = f[3] * u - 3 * f[2] * u**2 + 3 * f[1] * u**3
    c4_dd = f[2] * u**2 - f[1] * u**3
    n4 = (n[..., :, None, None, None] * n[..., None, :, None, None]
          * n[..., None, None, :, None] * n[..., None, None, None, :])
    dnn = np.zeros(shape + (3, 3, 3, 3), dtype=complex)
    dd = np.zeros(shape + (3, 3, 3, 3), dtype=float)
    for i in range(3):
        for j in range(3):
            for a in range(3):
                for b in range(3):
                    dnn[..., i, j, a, b] = (
                        (a == b) * n[..., i] * n[..., j]
                        + (j == a) * n[..., i] * n[..., b]
                        + (j == b) * n[..., i] * n[..., a]
                        + (i == a) * n[..., j] * n[..., b]
                        + (i == b) * n[..., j] * n[..., a]
                        + (i == j) * n[..., a] * n[..., b]
                    )
                    dd[..., i, j, a, b] = ((i == j) * (a == b)
                                           + (i == a) * (j == b)
                                           + (i == b) * (j == a))
    rank4 = (c4_n4[..., None, None, None, None] * n4
             + c4_dn[..., None, None, None, None] * dnn
             + c4_dd[..., None, None, None, None] * dd)
    H = (rank2[..., :, :, None, None] * _EYE
         + rank4 / k2[..., None, None, None, None])
    return G, D, H


def self_tensors(k):
    """Regularized coincidence blocks of (G0, grad G0, hess G0).

    The real parts diverge in the point-scatterer limit and are resummed
    into the dressed polarizability; the finite imaginary parts remain:
    G_self = i k/(6 pi) * 1, D_self = 0 (isotropy), and the small-d
    Hessian limit of i Im G0.  Shapes broadcast over k.
    """
    k = np.asarray(k, dtype=float)
    shape = k.shape
    G_self = 1j * (k / (6.0 * np.pi))[..., None, None] * _EYE
    D_self = np.zeros(shape + (3, 3, 3), dtype=complex)
    H_self = np.zeros(shape + (3, 3, 3, 3), dtype=complex)
    pref = k**3 / (4.0 * np.pi)
    for i in range(3):
        for j in range(3):
            for a in range(3):
                for b in range(3):
                    v = (-(4.0 / 15.0) * (i == j) * (a == b)
                         + (1.0 / 15.0) * ((i == a) * (j == b) + (j == a) * (i == b)))
                    if v:
                        H_self[..., i, j, a, b] = 1j * pref * v
    return G_self, D_self, H_self


def g0_free(r, rp, omega):
    """Free-space dyadic Green's function between two distinct points.

    Raises for coincident points (the full value diverges there); the
    imaginary coincidence limit is exposed by im_g0_coincidence.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    d = r - rp
    if np.linalg.norm(d) == 0:
        raise ValueError("r == r'; use im_g0_coincidence for the Im limit")
    k = float(omega) / C_LIGHT
    if not np.isfinite(k) or k <= 0:
        raise ValueError("omega must be positive and finite")
    G, D = free_tensors(d, k, order=1)
    return GreensBlock(value=G, grad=D, which="free")


def im_g0_coincidence(omega):
    """Im G0(r, r) = (w/c)/(6 pi) times the identity."""
    k = float(omega) / C_LIGHT
    return (k / (6.0 * np.pi)) * np.eye(3)


# ----------------------------------------------------------------------
# Half-space (plate) reflected Green's function
# ----------------------------------------------------------------------

def fresnel_rs_rp(eps_plate, k, k_par):
    """Fresnel reflection coefficients from vacuum onto a half-space.

    eps_plate is a complex permittivity or None for a perfect mirror
    (r_s = -1, r_p = +1).  k_par may exceed k (evanescent waves).
    """
    k_par = np.asarray(k_par, dtype=float)
    kz1 = np.sqrt((k**2 - k_par**2).astype(complex))
    if eps_plate is None:
        return (np.full(k_par.shape, -1.0 + 0j), np.full(k_par.shape, 1.0 + 0j))
    eps = complex(eps_plate)
    kz2 = np.sqrt(eps * k**2 - k_par**2 + 0j)
    rs = (kz1 - kz2) / (kz1 + kz2)
    rp = (eps * kz1 - kz2) / (eps * kz1 + kz2)
    return rs, rp


def _bessel_j1_over_w(w, J1):
    return np.where(w > 1e-8, J1 / np.where(w > 1e-8, w, 1.0), 0.5)


def _bessel_j2_over_w(w, J2):
    return np.where(w > 1e-8, J2 / np.where(w > 1e-8, w, 1.0), 0.0)


def _plate_kernels(k, k_par, kz, eps, rho, Z, zderiv=False):
    """Per-mode integrands (measure dk_par) of the frame components.

    Components are in the (u, v, z) frame: uu, vv, zz diagonal and uz
    (zu = -uz).  Also returns rho-derivative kernels and the ratios
    needed for the rho -> 0 gradient limit.
    """
    rs, rp = fresnel_rs_rp(eps, k, k_par)
    w = k_par * rho
    J0 = _J0(w)
    J1 = _J1(w)
    J2 = _Jv(2, w)
    dJ1 = np.where(w > 1e-8, J0 - J1 / np.where(w > 1e-8, w, 1.0), 0.5)
    dJ2 = np.where(w > 1e-8, J1 - 2.0 * J2 / np.where(w > 1e-8, w, 1.0), 0.0)
    phase = np.exp(1j * kz * Z)
    if zderiv:
        phase = phase * (1j * kz)
    a = (1j / (8 * np.pi)) * (k_par / kz) * phase
    c = (1.0 / (4 * np.pi)) * (k_par**2 / k**2) * phase
    return {
        "uu": a * (rs * (J0 + J2) - rp * (kz**2 / k**2) * (J0 - J2)),
        "vv": a * (rs * (J0 - J2) - rp * (kz**2 / k**2) * (J0 + J2)),
        "zz": 2.0 * a * rp * (k_par**2 / k**2) * J0,
        "uz": c * rp * J1,
        "uu_r": a * k_par * (rs * (-J1 + dJ2) - rp * (kz**2 / k**2) * (-J1 - dJ2)),
        "vv_r": a * k_par * (rs * (-J1 - dJ2) - rp * (kz**2 / k**2) * (-J1 + dJ2)),
        "zz_r": 2.0 * a * rp * (k_par**3 / k**2) * (-J1),
        "uz_r": c * rp * k_par * dJ1,
        "uz_over_rho": c * rp * k_par * _bessel_j1_over_w(w, J1),
        "uuvv_over_rho": 2.0 * a * k_par * (rs + rp * (kz**2 / k**2))
        * _bessel_j2_over_w(w, J2),
    }


def _sommerfeld_pass(k, eps, rho, Z, n, zderiv):
    xg, wg = leggauss(n)
    # propagating region, k_par = k sin t (1/kz endpoint regularized)
    t = 0.25 * np.pi * (xg + 1.0)
    wt = 0.25 * np.pi * wg
    k_par_p = k * np.sin(t)
    kz_p = k * np.cos(t)
    vals = _plate_kernels(k, k_par_p, kz_p, eps, rho, Z, zderiv)
    jac = k * np.cos(t) * wt
    out = {key: np.sum(v * jac) for key, v in vals.items()}
    # evanescent region, kz = i kappa, geometric panels refined around
    # the propagating edge (both the 1/Z decay scale and k matter there)
    kap_max = max(45.0 / Z, 6.0 * k)
    edges = [0.0]
    step = min(1.0 / Z, k, kap_max / 8.0) / 8.0
    while edges[-1] < kap_max:
        edges.append(min(edges[-1] + step, kap_max))
        step *= 2.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        kap = 0.5 * (a + b) + half * xg
        wk = half * wg
        k_par_e = np.sqrt(k**2 + kap**2)
        kz_e = 1j * kap
        vals = _plate_kernels(k, k_par_e, kz_e, eps, rho, Z, zderiv)
        jac = wk * kap / k_par_e
        for key, v in vals.items():
            out[key] += np.sum(v * jac)
    return out


def _sommerfeld(k, eps, rho, Z, zderiv=False, n_base=32):
    prev = _sommerfeld_pass(k, eps, rho, Z, n_base, zderiv)
    err = np.inf
    for n in (2 * n_base, 4 * n_base, 8 * n_base, 16 * n_base):
        cur = _sommerfeld_pass(k, eps, rho, Z, n, zderiv)
        scale = max(max(abs(v) for v in cur.values()), 1e-300)
        err = max(abs(cur[key] - prev[key]) for key in cur) / scale
        prev = cur
        if err < _PLATE_TOL:
            return cur, err
    return prev, err


def _frame_matrix(comps):
    M = np.zeros((3, 3), dtype=complex)
    M[0, 0] = comps["uu"]
    M[1, 1] = comps["vv"]
    M[2, 2] = comps["zz"]
    M[0, 2] = comps["uz"]
    M[2, 0] = -comps["uz"]
    return M


def g0_plate(r, rp, omega, plate, gap_axis=(0.0, 0.0, 1.0)):
    """Reflected part of the half-space Green's function.

    The plate fills the half-space below the plane through the origin
    normal to gap_axis; both points must lie strictly above.  Adaptive
    Sommerfeld quadrature at relative tolerance 1e-8; the reflected part
    is regular at r == r'.  The flag diagnostics['converged'] is False
    when the tolerance was not reached.
    """
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    axis = np.asarray(gap_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    z = float(r @ axis)
    zp = float(rp @ axis)
    if z <= 0 or zp <= 0:
        raise ValueError("both points must lie strictly above the plate surface")
    k = float(omega) / C_LIGHT

    if plate.is_mirror:
        eps = None
    else:
        eps = complex(np.asarray(plate.epsilon(np.asarray([omega])))[0])
        if eps == 1.0:
            return GreensBlock(value=np.zeros((3, 3), complex),
                               grad=np.zeros((3, 3, 3), complex),
                               which="plate_reflected",
                               diagnostics={"err": 0.0, "converged": True})

    rho_vec = (r - rp) - ((r - rp) @ axis) * axis
    rho = float(np.linalg.norm(rho_vec))
    Z = z + zp
    comps, err = _sommerfeld(k, eps, rho, Z)
    comps_z, err_z = _sommerfeld(k, eps, rho, Z, zderiv=True)

    u = rho_vec / rho if rho > 0 else _any_perpendicular(axis)
    v = np.cross(axis, u)
    Q = np.column_stack([u, v, axis])

    M = _frame_matrix(comps)
    value = Q @ M @ Q.T

    Mr = np.zeros((3, 3), dtype=complex)
    Mr[0, 0] = comps["uu_r"]
    Mr[1, 1] = comps["vv_r"]
    Mr[2, 2] = comps["zz_r"]
    Mr[0, 2] = comps["uz_r"]
    Mr[2, 0] = -comps["uz_r"]

    A = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    if rho > 1e-12 * Z:
        comm = (A @ M - M @ A) / rho
    else:
        comm = np.zeros((3, 3), dtype=complex)
        comm[0, 1] = comps["uuvv_over_rho"]
        comm[1, 0] = comps["uuvv_over_rho"]
        comm[1, 2] = comps["uz_over_rho"]
        comm[2, 1] = -comps["uz_over_rho"]

    du = Q @ Mr @ Q.T
    dv = Q @ comm @ Q.T
    dz = Q @ _frame_matrix(comps_z) @ Q.T
    grad = np.zeros((3, 3, 3), dtype=complex)
    for i in range(3):
        grad[i] = u[i] * du + v[i] * dv + axis[i] * dz
    return GreensBlock(value=value, grad=grad, which="plate_reflected",
                       diagnostics={"err": max(err, err_z),
                                    "converged": max(err, err_z) < _PLATE_TOL})


def _any_perpendicular(axis):
    trial = np.array([1.0, 0.0, 0.0])
    if abs(axis @ trial) > 0.9:
        trial = np.array([0.0, 1.0, 0.0])
    p = trial - (trial @ axis) * axis
    return p / np.linalg.norm(p)
