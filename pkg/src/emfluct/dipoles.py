"""Coupled-dipole operator algebra for two objects of point scatterers.

Each object is a set of point scatterers with bare Clausius-Mossotti
polarizabilities.  Site-basis matrices (dimension 3N) represent the free
Green's function G0, its gradient and Hessian kernels, and the resummed
object scattering operators T1, T2.  The regularization is the standard
renormalized point-scattering one: G0 self-blocks keep only the finite
radiative part i k/(6 pi) (the divergent real part is absorbed into the
polarizability), gradient self-blocks vanish by isotropy of the
coincidence limit, and Hessian self-blocks keep the finite imaginary
limit.  With this single rule the dressed single-site operator
t = 4 pi k^2 alpha_dressed emerges from the resummation automatically
and every trace below is finite.

Sign conventions are anchored machine-checkably: heat transfer between
lossy objects is positive from hot to cold, an isolated dressed dipole's
emission equals the l = 1 Mie emission, and the isolated-dipole friction
is positive.  Derivative operators inside traces act as kernel
derivatives on the adjacent Green's-function factor (integration by
parts against the point-scatterer deltas).  Velocity responses use the
frame decomposition: moving one object equals moving the photon bath
and the other object backwards, which expresses the self blocks through
the bath-wind response and the cross blocks.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR, KB, C_LIGHT
from .materials import alpha0 as _alpha0
from .numerics import SpectralGrid, bose_n, bose_dn_dT, build_grid, gk_weight
from .greens import free_tensors, self_tensors

__all__ = [
    "Site",
    "ScatterCluster",
    "Assembly",
    "ResponseResult",
    "assemble",
    "m_operators",
    "heat_transfer",
    "gk_conductance",
    "force_response",
    "friction",
    "friction_via_linear_response",
    "onsager_check",
    "response",
]


@dataclass(frozen=True)
class Site:
    """One point scatterer: position (m), dielectric model, radius (m)."""
    position: tuple
    model: object
    radius: float


@dataclass
class ScatterCluster:
    """Point scatterers partitioned into objects 1 and 2.

    Velocities are carried only as labels; every response below is a
    linear-response derivative evaluated at v = 0.
    """
    sites: list
    labels: list
    T1: float = 300.0
    T2: float = 300.0
    T_env: float = 300.0
    v1: tuple = (0.0, 0.0, 0.0)
    v2: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.sites) == 0:
            raise ValueError("cluster needs at least one site")
        if len(self.labels) != len(self.sites):
            raise ValueError("labels must match sites")
        if any(lab not in (1, 2) for lab in self.labels):
            raise ValueError("labels must be 1 or 2")
        pos = self.positions
        n = len(self.sites)
        for i in range(n):
            for j in range(i + 1, n):
                if np.linalg.norm(pos[i] - pos[j]) <= 0:
                    raise ValueError("site positions must be distinct")
        for s in self.sites:
            if s.radius <= 0:
                raise ValueError("site radius must be positive")

    @property
    def positions(self):
        return np.asarray([s.position for s in self.sites], dtype=float)

    def site_indices(self, obj):
        return [i for i, lab in enumerate(self.labels) if lab == obj]

    def require_two_objects(self):
        if not self.site_indices(1) or not self.site_indices(2):
            raise ValueError("operation requires sites in both objects")


@dataclass
class ResponseResult:
    """Linear-response coefficients of a two-object cluster.

    k[a, b] = k_a^(b) (W/K): minus the response of object b's absorbed
    power to object a's temperature.  dF_dT[a, b, i] (N/K): response of
    the force on b to object a's temperature.  gamma[a, b, i, j]
    (N s/m): minus the response of the force on b to object a's
    velocity.  Index 0 is object 1.
    """
    k: np.ndarray
    dF_dT: np.ndarray
    gamma: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def _blocks_to_matrix(blocks):
    # (nw, N, N, 3, 3) -> (nw, 3N, 3N)
    nw, n = blocks.shape[0], blocks.shape[1]
    return blocks.transpose(0, 1, 3, 2, 4).reshape(nw, 3 * n, 3 * n)


def _batched_inv(mat, diagnostics, label):
    try:
        return np.linalg.inv(mat)
    except np.linalg.LinAlgError:
        diagnostics.setdefault("singular", []).append(label)
        return np.linalg.pinv(mat)


class Assembly:
    """Site-basis operator stacks for a cluster on a frequency grid.

    Matrices are stacked over the grid: shape (n_omega, 3N, 3N).
    """

    def __init__(self, cluster, grid):
        self.cluster = cluster
        self.grid = grid
        self.diagnostics = {}
        w = grid.nodes
        k = w / C_LIGHT
        self.k = k
        pos = cluster.positions
        n = len(cluster.sites)
        self.n_sites = n

        dvec = pos[:, None, :] - pos[None, :, :]
        offdiag = ~np.eye(n, dtype=bool)
        dsafe = np.where(offdiag[..., None], dvec, np.array([1.0, 0.0, 0.0]))
        G_b, D_b, H_b = free_tensors(dsafe, k, order=2)
        Gs, Ds, Hs = self_tensors(k)
        eyemask = np.eye(n, dtype=bool)[None, :, :, None, None]
        G_b = np.where(eyemask, Gs[:, None, None, :, :], G_b)
        D_b = np.where(eyemask[..., None], Ds[:, None, None, :, :, :], D_b)
        H_b = np.where(eyemask[..., None, None], Hs[:, None, None, :, :, :, :], H_b)

        self.G = _blocks_to_matrix(G_b)
        self.D = [_blocks_to_matrix(D_b[..., i, :, :]) for i in range(3)]
        self.H = [[_blocks_to_matrix(H_b[..., i, j, :, :]) for j in range(3)]
                  for i in range(3)]
        self.IG = self.G.imag
        self.ID = [d.imag for d in self.D]
        self.IH = [[self.H[i][j].imag for j in range(3)] for i in range(3)]

        a0 = np.stack([_alpha0(s.model, s.radius, w) for s in cluster.sites], axis=1)
        self.alpha0_sites = a0
        self.t_bare = 4.0 * np.pi * k[:, None] ** 2 * a0

        self.T = {}
        for obj in (1, 2):
            self.T[obj] = self._resummed_t(obj)

    def _resummed_t(self, obj):
        n = self.n_sites
        nw = self.k.size
        out = np.zeros((nw, 3 * n, 3 * n), dtype=complex)
        idx = self.cluster.site_indices(obj)
        if not idx:
            return out
        sel = np.concatenate([np.arange(3 * i, 3 * i + 3) for i in idx])
        Gs = self.G[np.ix_(np.arange(nw), sel, sel)]
        tvals = np.repeat(self.t_bare[:, idx], 3, axis=1)
        A = tvals[:, :, None] * np.eye(len(sel))
        M = np.eye(len(sel))[None, :, :] - Gs @ A
        Tsub = A @ _batched_inv(M, self.diagnostics, f"T{obj} resummation")
        cond = np.linalg.cond(M)
        self.diagnostics[f"cond_T{obj}"] = float(np.max(cond))
        out[np.ix_(np.arange(nw), sel, sel)] = Tsub
        return out

    # -- chain operators ------------------------------------------------

    def other(self, obj):
        return 2 if obj == 1 else 1

    def x_bracket(self, obj):
        """Im T - T Im(G0) T* for one object (the source strength)."""
        T = self.T[obj]
        return T.imag - T @ self.IG @ T.conj()

    def k_chain(self, src):
        """(T_o + T_src G T_o)(1 - G T_src G T_o)^-1 with o = other(src)."""
        To = self.T[self.other(src)]
        Ts = self.T[src]
        G = self.G
        M = np.eye(G.shape[-1])[None] - G @ Ts @ G @ To
        cond = np.linalg.cond(M)
        key = f"cond_scatter_{src}"
        self.diagnostics[key] = max(self.diagnostics.get(key, 0.0), float(np.max(cond)))
        W = _batched_inv(M, self.diagnostics, f"multiple scattering src={src}")
        return (To + Ts @ G @ To) @ W

    def v_chain(self, src):
        """(1 - G* T_o* G* T_src*)^-1 with o = other(src)."""
        To = self.T[self.other(src)].conj()
        Ts = self.T[src].conj()
        Gc = self.G.conj()
        M = np.eye(Gc.shape[-1])[None] - Gc @ To @ Gc @ Ts
        return _batched_inv(M, self.diagnostics, f"conjugate scattering src={src}")

    def vt_chain(self, src, rd):
        """(1 - T_rd* G* T_src* G*)^-1, the tail of the cross pattern."""
        Trd = self.T[rd].conj()
        Ts = self.T[src].conj()
        Gc = self.G.conj()
        M = np.eye(Gc.shape[-1])[None] - Trd @ Gc @ Ts @ Gc
        return _batched_inv(M, self.diagnostics, f"cross tail src={src}")

    def t_system(self):
        """Resummed scattering operator of the whole cluster."""
        n3 = self.G.shape[-1]
        tvals = np.repeat(self.t_bare, 3, axis=1)
        A = tvals[:, :, None] * np.eye(n3)
        M = np.eye(n3)[None] - self.G @ A
        return A @ _batched_inv(M, self.diagnostics, "system T")

    def readout_op(self, obj):
        """T_b* (1 + G* T_b*)^-1: extracts object b's induced response
        from a fully dressed field correlator."""
        Tb = self.T[obj].conj()
        eye = np.eye(self.G.shape[-1])[None]
        return Tb @ _batched_inv(eye + self.G.conj() @ Tb,
                                 self.diagnostics, f"readout {obj}")


def _tr(A, B=None):
    if B is None:
        return np.trace(A, axis1=-2, axis2=-1)
    return np.einsum("wij,wji->w", A, B)


# ----------------------------------------------------------------------
# Spec-level single-frequency assembly
# ----------------------------------------------------------------------

def assemble(cluster, omega):
    """Site-basis operators of a cluster at one frequency.

    Returns a dict with the resummed object operators T1, T2, the
    (regularized) free Green's matrix G0, Im G0 including the radiative
    self term, and the three gradient matrices gradG0.
    """
    grid = SpectralGrid(nodes=np.asarray([float(omega)]),
                        weights=np.asarray([1.0]),
                        temperature_scale=300.0)
    asm = Assembly(cluster, grid)
    return {
        "T1": asm.T[1][0],
        "T2": asm.T[2][0],
        "G0": asm.G[0],
        "ImG0": asm.IG[0],
        "gradG0": np.stack([asm.D[i][0] for i in range(3)]),
        "diagnostics": asm.diagnostics,
    }


def m_operators(assembled):
    """M operators of the two-object heat-transfer traces.

    Takes the dict from :func:`assemble` and returns {"M1": ..., "M2":
    ...}, the operators whose Im-traces give the transfer from object 1
    to 2 and the self-emission of object 2.
    """
    T1 = assembled["T1"][None]
    T2 = assembled["T2"][None]
    G = assembled["G0"][None]
    IG = assembled["ImG0"][None].astype(complex)
    eye = np.eye(G.shape[-1])[None]
    diag = {}
    X1 = T1.imag + 0j * T1 - T1 @ IG @ T1.conj()
    X2 = T2.imag + 0j * T2 - T2 @ IG @ T2.conj()
    W1 = _batched_inv(eye - G @ T1 @ G @ T2, diag, "W1")
    V1 = _batched_inv(eye - T2.conj() @ G.conj() @ T1.conj() @ G.conj(), diag, "V1")
    M1 = (eye + G @ T2) @ W1 @ G @ X1 @ G.conj() @ V1 @ T2.conj()
    W2 = _batched_inv(eye - G @ T2 @ G @ T1, diag, "W2")
    V2 = _batched_inv(eye - G.conj() @ T1.conj() @ G.conj() @ T2.conj(), diag, "V2")
    M2 = (eye + G @ T1) @ W2 @ G @ X2 @ V2
    return {"M1": M1[0], "M2": M2[0]}


# ----------------------------------------------------------------------
# Heat transfer and the Green-Kubo conductance
# ----------------------------------------------------------------------

def _im_tr_m(asm, src, rd):
    """Im Tr M_src^(rd) over the grid (A3 pattern for src != rd, A4 for
    the self pattern; the bracket-prefix G0 of the self pattern is safe
    because its self-blocks are the regularized i k/(6 pi))."""
    G = asm.G
    eye = np.eye(G.shape[-1])[None]
    Ts = asm.T[src]
    X = asm.x_bracket(src)
    K = asm.k_chain(src)
    left = (eye + G @ K) @ G @ X
    if rd == src:
        V = asm.v_chain(src)
        return _tr(left, V).imag
    Vt = asm.vt_chain(src, rd)
    tail = G.conj() @ Vt @ asm.T[rd].conj()
    return _tr(left, tail).imag


def heat_transfer(cluster, grid=None, rel_tol=1e-8):
    """Radiative heat absorbed by object 2, decomposed per source.

    Returns a dict with the net absorption H2_net at the cluster's
    temperatures, the transfer component H_12(T1) from object 1, and the
    self-emission component H_22(T2), all in W.  The net value combines
    the components with their environment-temperature counterparts, so
    it vanishes identically in equilibrium.
    """
    if grid is None:
        grid = build_grid(max(cluster.T1, cluster.T2, cluster.T_env), rel_tol)
    asm = Assembly(cluster, grid)
    w = grid.nodes
    tr1 = _im_tr_m(asm, 1, 2)
    tr2 = _im_tr_m(asm, 2, 2)

    def comp(trace, T):
        return -(2.0 * HBAR / np.pi) * grid.integrate(w * bose_n(w, T) * trace)

    h1_T1 = comp(tr1, cluster.T1)
    h1_env = comp(tr1, cluster.T_env)
    h2_T2 = comp(tr2, cluster.T2)
    h2_env = comp(tr2, cluster.T_env)
    return {
        "H2_net": (h1_T1 - h1_env) + (h2_T2 - h2_env),
        "H_12": h1_T1,
        "H_22": h2_T2,
        "diagnostics": dict(asm.diagnostics, grid=grid.diagnostics),
    }


def gk_conductance(cluster, T, grid=None, rel_tol=1e-8):
    """Conductance matrix k_a^(b) by two routes.

    The returned 2x2 array is the temperature-derivative route (the
    analytic dn/dT weight applied to the transfer traces); the
    equilibrium flux-correlation route (Green-Kubo weight) is stored in
    diagnostics["k_corr"] together with the maximum relative
    discrepancy.  A discrepancy above 1e-6 flags a consistency failure.
    """
    if grid is None:
        grid = build_grid(T, rel_tol)
    asm = Assembly(cluster, grid)
    w = grid.nodes
    dndT = bose_dn_dT(w, T)
    gk = gk_weight(w, T)
    k_deriv = np.zeros((2, 2))
    k_corr = np.zeros((2, 2))
    for a in (1, 2):
        for b in (1, 2):
            trace = _im_tr_m(asm, a, b)
            k_deriv[a - 1, b - 1] = (2.0 * HBAR / np.pi) * grid.integrate(
                w * dndT * trace)
            k_corr[a - 1, b - 1] = (2.0 * HBAR**2 / (np.pi * KB * T**2)) * \
                grid.integrate(w**2 * gk * trace)
    scale = np.max(np.abs(k_deriv))
    disc = float(np.max(np.abs(k_deriv - k_corr)) / scale) if scale > 0 else 0.0
    if disc > 1e-6:
        warnings.warn(f"Green-Kubo route discrepancy {disc:.3e}", stacklevel=2)
    diagnostics = dict(asm.diagnostics, k_corr=k_corr, gk_discrepancy=disc,
                       grid=grid.diagnostics)
    return k_deriv, diagnostics


# ----------------------------------------------------------------------
# Force response to temperature
# ----------------------------------------------------------------------

def _force_traces(asm, src, rd):
    """Re Tr of the force-gradient traces, shape (3, n_omega).

    The gradient acts as the field-point derivative at the force object:
    the leading kernel of the source pattern is replaced by its gradient
    blocks.
    """
    G = asm.G
    eye = np.eye(G.shape[-1])[None]
    X = asm.x_bracket(src)
    K = asm.k_chain(src)
    mid = eye + K @ G
    if rd == src:
        tail = X @ asm.v_chain(src)
    else:
        tail = X @ G.conj() @ asm.vt_chain(src, rd) @ asm.T[rd].conj()
    body = mid @ tail
    return np.stack([_tr(asm.D[i], body).real for i in range(3)])


def force_response(cluster, T, grid=None, rel_tol=1e-8):
    """Force-temperature response dF^(b)/dT_a by two routes.

    Returns an array of shape (2, 2, 3): axis 0 the perturbed object a,
    axis 1 the object b the force acts on, axis 2 the Cartesian
    component.  The temperature-derivative route is returned; the
    force-flux correlation route is stored in diagnostics["dF_corr"]
    with the maximum relative discrepancy.
    """
    if grid is None:
        grid = build_grid(T, rel_tol)
    asm = Assembly(cluster, grid)
    w = grid.nodes
    dndT = bose_dn_dT(w, T)
    gk = gk_weight(w, T)
    out = np.zeros((2, 2, 3))
    out_corr = np.zeros((2, 2, 3))
    for a in (1, 2):
        for b in (1, 2):
            traces = _force_traces(asm, a, b)
            for i in range(3):
                out[a - 1, b - 1, i] = (2.0 * HBAR / np.pi) * grid.integrate(
                    dndT * traces[i])
                out_corr[a - 1, b - 1, i] = (2.0 * HBAR**2 / (np.pi * KB * T**2)) * \
                    grid.integrate(w * gk * traces[i])
    scale = np.max(np.abs(out))
    disc = float(np.max(np.abs(out - out_corr)) / scale) if scale > 0 else 0.0
    diagnostics = dict(asm.diagnostics, dF_corr=out_corr, force_discrepancy=disc,
                       grid=grid.diagnostics)
    return out, diagnostics


def hf_correlation_integrals(cluster, T, grid=None, rel_tol=1e-8):
    """Equilibrium correlation integrals of flux and force.

    Returns (corr_HF, corr_FH), each of shape (2, 2, 3) indexed
    [flux object a, force object b, component i], for
    int_0^inf dt <H^(a)(t) F^(b)(0)> and the reversed ordering.  The two
    orderings are antisymmetric in time, corr_HF = -corr_FH.
    """
    if grid is None:
        grid = build_grid(T, rel_tol)
    asm = Assembly(cluster, grid)
    w = grid.nodes
    gk = gk_weight(w, T)
    corr_FH = np.zeros((2, 2, 3))
    for a in (1, 2):
        for b in (1, 2):
            traces = _force_traces(asm, a, b)
            for i in range(3):
                corr_FH[a - 1, b - 1, i] = -(2.0 * HBAR**2 / np.pi) * \
                    grid.integrate(w * gk * traces[i])
    return -corr_FH, corr_FH


# ----------------------------------------------------------------------
# Vacuum friction, two routes
# ----------------------------------------------------------------------

def _surrogate_weight(grid, T):
    # square root of the Green-Kubo measure: Gaussian pairings of two
    # such weights reproduce e^x/(e^x-1)^2 exactly.
    return np.sqrt(gk_weight(grid.nodes, T))


def friction(cluster, T, grid=None, rel_tol=1e-8):
    """Vacuum friction tensors gamma_a^(b) from the scattering form.

    Returns (gamma, diagnostics), gamma of shape (2, 2, 3, 3):
    gamma[a, b] is minus the derivative of the force on object b with
    respect to object a's velocity at global equilibrium temperature T.
    Evaluated as the time integral of the equilibrium force-force
    correlation with the (p, grad E) spectral densities taken from the
    fluctuation-dissipation theorem applied to the dressed system
    response functions.
    """
    if T <= 0:
        raise ValueError("T must be positive (the T = 0 statement is a limit)")
    if grid is None:
        grid = build_grid(T, rel_tol)
    from .localfield import LocalFieldModel
    asm = Assembly(cluster, grid)
    lf = LocalFieldModel(asm)
    csds = lf.joint_csds_fdt(_surrogate_weight(grid, T))
    gamma = lf.friction_from_csds(csds, T)
    return gamma, dict(asm.diagnostics, grid=grid.diagnostics)


def friction_via_linear_response(cluster, T, grid=None, rel_tol=1e-8):
    """Vacuum friction via the explicit-source local-field route.

    Same observable as :func:`friction`, with the spectral densities
    built instead from elementary fluctuating sources (per-site dipole
    noise and the free field with its gradients) propagated through the
    coupled-dipole solve.  Agreement between the two routes checks the
    linear-response identity between the scattering form and the force
    autocorrelation.
    """
    if T <= 0:
        raise ValueError("T must be positive (the T = 0 statement is a limit)")
    if grid is None:
        grid = build_grid(T, rel_tol)
    from .localfield import LocalFieldModel
    asm = Assembly(cluster, grid)
    lf = LocalFieldModel(asm)
    csds = lf.joint_csds_elementary(_surrogate_weight(grid, T))
    gamma = lf.friction_from_csds(csds, T)
    return gamma, dict(asm.diagnostics, grid=grid.diagnostics)


# ----------------------------------------------------------------------
# Velocity response of the absorbed heat and the Onsager check
# ----------------------------------------------------------------------

def _heat_velocity_cross_trace(asm, rd, mv):
    """Re Tr traces of d<H^(rd)>/dv_mv for rd != mv, shape (3, n_omega).

    The moving object's velocity-source bracket, resolved into gradient
    blocks, is read out by the absorption pattern of object rd.
    """
    G = asm.G
    Gc = G.conj()
    eye = np.eye(G.shape[-1])[None]
    Tb = asm.T[mv]
    Tbc = Tb.conj()
    K = asm.k_chain(mv)
    Vt = asm.vt_chain(mv, rd)
    tail = Vt @ asm.T[rd].conj()
    P = eye + G @ K
    out = np.zeros((3, G.shape[0]), dtype=complex)
    for j in range(3):
        Sj = (1j * (asm.D[j] @ Tbc @ Gc - G @ Tb @ asm.D[j].conj())
              - 2.0 * G @ Tb @ asm.ID[j] @ Tbc @ Gc)
        out[j] = _tr(P @ Sj, tail)
    return out.real


def _wind_heat_traces(asm, rd):
    """Re Tr traces of d<H^(rd)>/du for the bath moving at velocity u,
    shape (3, n_omega): the gradient of the free-field correlator,
    dressed by the full system and read out on object rd."""
    Ts = asm.t_system()
    Gc = asm.G.conj()
    eye = np.eye(asm.G.shape[-1])[None]
    R = asm.readout_op(rd)
    P = eye + asm.G @ Ts
    tail = Ts.conj() @ Gc + eye
    out = np.zeros((3, asm.G.shape[0]))
    for j in range(3):
        M = P @ asm.ID[j] @ tail
        out[j] = _tr(M, R).real
    return out


def _wind_force_traces(asm, rd):
    """Im Tr traces of dF_i^(rd)/du_j (3, 3, n_omega)."""
    Ts = asm.t_system()
    Gc = asm.G.conj()
    eye = np.eye(asm.G.shape[-1])[None]
    R = asm.readout_op(rd)
    tail = Ts.conj() @ Gc + eye
    out = np.zeros((3, 3, asm.G.shape[0]))
    for j in range(3):
        TsIDt = Ts @ (asm.ID[j] @ tail)
        for i in range(3):
            M = asm.IH[i][j] @ tail + asm.D[i] @ TsIDt
            out[i, j] = _tr(M, R).imag
    return out


def wind_response(cluster, T, grid=None, rel_tol=1e-8):
    """Responses to a moving photon bath (velocity u), at equilibrium T.

    Returns (dH_du, dF_du): dH_du[b, j] = d<H^(b)>/du_j in J/m and
    dF_du[b, i, j] = dF_i^(b)/du_j in N s/m.  By frame invariance these
    equal the sums over objects of the corresponding velocity responses.
    """
    if grid is None:
        grid = build_grid(T, rel_tol)
    asm = Assembly(cluster, grid)
    w = grid.nodes
    gk = gk_weight(w, T)
    pref = 2.0 * HBAR**2 / (np.pi * KB * T)
    dH_du = np.zeros((2, 3))
    dF_du = np.zeros((2, 3, 3))
    for b in (1, 2):
        th = _wind_heat_traces(asm, b)
        tf = _wind_force_traces(asm, b)
        for j in range(3):
            dH_du[b - 1, j] = pref * grid.integrate(w * gk * th[j])
            for i in range(3):
                dF_du[b - 1, i, j] = pref * grid.integrate(gk * tf[i, j])
    return dH_du, dF_du


def heat_velocity_response(cluster, T, grid=None, rel_tol=1e-8):
    """d<H^(a)>/dv_b at equilibrium: shape (2, 2, 3), axis 0 the
    absorbing object, axis 1 the moving object.

    Cross blocks come from the moving object's perturbed field
    correlator read out on the other object; diagonal blocks follow
    from frame invariance, dH/dv_b = -dH/du - dH/dv_other, with the
    photon-bath (wind) response.
    """
    if grid is None:
        grid = build_grid(T, rel_tol)
    asm = Assembly(cluster, grid)
    w = grid.nodes
    gk = gk_weight(w, T)
    pref = HBAR**2 / (np.pi * KB * T)
    out = np.zeros((2, 2, 3))
    for a in (1, 2):
        b = 2 if a == 1 else 1
        traces = _heat_velocity_cross_trace(asm, a, b)
        for j in range(3):
            out[a - 1, b - 1, j] = pref * grid.integrate(w * gk * traces[j])
    wind = np.zeros((2, 3))
    pref_w = 2.0 * HBAR**2 / (np.pi * KB * T)
    for a in (1, 2):
        th = _wind_heat_traces(asm, a)
        for j in range(3):
            wind[a - 1, j] = pref_w * grid.integrate(w * gk * th[j])
    for a in (1, 2):
        b = 2 if a == 1 else 1
        out[a - 1, a - 1] = -wind[a - 1] - out[a - 1, b - 1]
    return out, dict(asm.diagnostics, grid=grid.diagnostics)


def onsager_check(cluster, T, grid=None, rel_tol=1e-8):
    """Residual of the heat/force reciprocity d<H^(a)>/dv_b = -T dF^(b)/dT_a.

    Returns (residual, details): the maximum relative deviation over
    objects and components, with both sides in the details dict.
    """
    if grid is None:
        grid = build_grid(T, rel_tol)
    dHdv, _ = heat_velocity_response(cluster, T, grid=grid)
    dFdT, _ = force_response(cluster, T, grid=grid)
    lhs = dHdv                       # [absorbing a, moving b, j]
    rhs = -T * dFdT                  # [T-perturbed a, force on b, i]
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)))
    if scale == 0:
        return 0.0, {"dHdv": lhs, "minus_T_dFdT": rhs}
    residual = float(np.max(np.abs(lhs - rhs)) / scale)
    return residual, {"dHdv": lhs, "minus_T_dFdT": rhs}


def response(cluster, T, grid=None, rel_tol=1e-8):
    """Full linear-response bundle at equilibrium temperature T."""
    if grid is None:
        grid = build_grid(T, rel_tol)
    k, kdiag = gk_conductance(cluster, T, grid=grid)
    dF, fdiag = force_response(cluster, T, grid=grid)
    gamma, gdiag = friction(cluster, T, grid=grid)
    diagnostics = {
        "gk": kdiag,
        "force": fdiag,
        "friction": gdiag,
    }
    return ResponseResult(k=k, dF_dT=dF, gamma=gamma, diagnostics=diagnostics)


# ----------------------------------------------------------------------
# Dipole above a plate: total heat conductance
# ----------------------------------------------------------------------

def dipole_plate_conductance(model, R, T, gap, plate, grid=None, rel_tol=1e-8,
                             gap_axis=(0.0, 0.0, 1.0)):
    """Heat conductance (W/K) of a small sphere above a half-space.

    The sphere is treated as a dressed point dipole at height R + gap
    above the surface; its total heat coupling (to the plate's near
    field and to free-space radiation) follows from the local density
    of states, tr Im[G0 + G_ref] at the dipole position:

        k(T) = (2 hbar/pi) int dw w dn/dT 4 pi k^2 chi(w) tr Im G_tot,

    with chi = Im alpha_d - (2/3) k^3 |alpha_d|^2.  As gap -> inf this
    reduces to the temperature derivative of the isolated dipole
    emission.
    """
    from .greens import g0_plate
    from .materials import alpha_dressed
    if R <= 0 or gap <= 0:
        raise ValueError("R and gap must be positive")
    if grid is None:
        grid = build_grid(T, rel_tol)
    w = grid.nodes
    k = w / C_LIGHT
    ad = alpha_dressed(model, R, w)
    chi = ad.imag - (2.0 / 3.0) * k**3 * np.abs(ad) ** 2
    z0 = R + gap
    axis = np.asarray(gap_axis, float)
    r0 = z0 * axis / np.linalg.norm(axis)
    tr_im = np.empty(w.size)
    for n, wn in enumerate(w):
        blk = g0_plate(r0, r0, wn, plate, gap_axis=gap_axis)
        tr_im[n] = k[n] / (2.0 * np.pi) + np.trace(blk.value).imag
    integrand = w * bose_dn_dT(w, T) * 4.0 * np.pi * k**2 * chi * tr_im
    return float((2.0 * HBAR / np.pi) * grid.integrate(integrand))
